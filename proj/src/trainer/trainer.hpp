#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "common/errors.hpp"
#include "curriculum/curriculum.hpp"
#include "encoder/encoder.hpp"
#include "json.hpp"
#include "objective/objective.hpp"
#include "pooling/pooling.hpp"
#include "synth/types.hpp"
#include "trainer/adam.hpp"

namespace mgh::train {

using synth::TrainingTriplet;

// "Instruct: {task}\nQuery: {text}" when enabled and the task is known;
// documents are always encoded bare.
std::string wrap_query(const synth::TaskSpec& task, const std::string& text, bool instruct);

struct TrainConfig {
  enc::EncoderConfig encoder;
  pool::PoolingSpec pooling;
  obj::InfoNceOptions loss;
  bool instruct = true;
  std::size_t batch_size = 16;
  std::size_t grad_accum = 2;
  std::size_t total_steps = 400;
  double learning_rate = 1e-3;
  std::size_t warmup_steps = 20;
  AdamOptions adam;
  cur::Strategy strategy = cur::Strategy::curriculum;
  int num_levels = 4;
  int fixed_level = 1;
  std::uint64_t schedule_seed = 0;
  std::size_t checkpoint_every = 0;  // 0: final checkpoint only

  TrainConfig();
  void validate() const;
  cur::ScheduleSpec schedule_spec() const;
  // Linear warmup to learning_rate, then constant.
  double lr_at(std::size_t step) const;
};

nlohmann::json to_json(const TrainConfig& cfg);
// Missing keys keep their defaults; unknown keys are rejected.
TrainConfig train_config_from_json(const nlohmann::json& j);

// Texts for one contrastive item, already wrapped.
struct Example {
  std::string query;
  std::string positive;
  std::string negative;  // empty: no hard negative
};

struct BatchGradients {
  double loss = 0.0;
  std::vector<num::Tensor> grads;  // parameter_layout order
};

// Forward and backward over one (micro-)batch.
BatchGradients batch_gradients(const enc::Encoder& model, const std::vector<Example>& batch,
                               const pool::PoolingSpec& pooling, const obj::InfoNceOptions& loss);

// Items of micro-batch `micro` (0-based) of step `step` (1-based): a fixed
// walk over the dataset, wrapping at the end.
std::vector<std::size_t> batch_indices(std::size_t step, std::size_t micro, std::size_t batch_size,
                                       std::size_t grad_accum, std::size_t dataset_size);

Example make_example(const TrainingTriplet& t, int level, bool instruct);

struct StepLog {
  std::size_t step = 0;
  int level = 0;
  double loss = 0.0;
};

// "step\tlevel\tloss" lines, loss printed with 17 significant digits.
std::string format_loss_log(const std::vector<StepLog>& log);

struct RunManifest {
  nlohmann::json config;
  nlohmann::json schedule;
  std::string dataset_digest;
  std::size_t dataset_size = 0;
  std::vector<StepLog> losses;
  std::string status = "ok";
  std::string diagnostic;
  std::vector<std::string> checkpoints;  // file names relative to the run dir
  std::string checkpoint_sha256;         // final checkpoint

  nlohmann::json to_json() const;
};

struct TrainResult {
  enc::Encoder model;
  RunManifest manifest;
};

// Raised on a non-finite loss; carries the manifest up to the failing step.
class TrainingAborted : public NumericError {
 public:
  TrainingAborted(const std::string& m, RunManifest manifest)
      : NumericError(m), manifest_(std::move(manifest)) {}
  const RunManifest& manifest() const { return manifest_; }

 private:
  RunManifest manifest_;
};

// When out_dir is non-empty, checkpoints go there ("step-<n>.ckpt" on the
// cadence, "model.ckpt" at the end).
TrainResult train(const TrainConfig& cfg, const std::vector<TrainingTriplet>& data,
                  const std::filesystem::path& out_dir = {});

}  // namespace mgh::train
