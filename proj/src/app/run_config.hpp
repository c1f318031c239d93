#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "datastore/datastore.hpp"
#include "json.hpp"
#include "synth/backend.hpp"
#include "synth/http_backend.hpp"
#include "synth/mock_backend.hpp"
#include "synth/pipeline.hpp"
#include "trainer/trainer.hpp"

namespace mgh::app {

inline constexpr int kSchemaVersion = 1;

struct BackendConfig {
  std::string kind = "mock";  // mock | http
  synth::HttpBackendConfig http;
  synth::RetryPolicy retry;
  std::size_t max_parallel = 4;
};

struct AugmentConfig {
  std::string pairs;  // pair file
  bool strict = false;
  std::string task = synth::default_retrieval_task().description;
  std::string output = "augmented.jsonl";
};

struct DataConfig {
  std::vector<data::MixInput> inputs;
  double eval_fraction = 0.2;
};

struct EvalConfig {
  std::string checkpoint;  // default: <output_dir>/model.ckpt
  std::string dataset;     // default: <output_dir>/eval.jsonl
  std::string mode = "desk";  // desk | granularity | ablation
  std::vector<std::string> poolings = {"mean", "last", "ata"};
};

// One run's configuration. Every module seed is derived from `seed`.
struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "run";
  BackendConfig backend;
  synth::MockOptions mock;
  synth::SynthConfig synth;
  std::string synth_output = "synthetic.jsonl";
  AugmentConfig augment;
  DataConfig data;
  train::TrainConfig train;
  EvalConfig eval;

  // Fully resolved configuration, derived seeds included.
  nlohmann::json to_json() const;
};

// "a.b.c=value"; value is read as JSON when it parses, else as a string.
void apply_override(nlohmann::json& j, const std::string& assignment);

// Throws ConfigError on a missing/unsupported schema_version, unknown keys
// or invalid values.
RunConfig parse_run_config(nlohmann::json j, const std::vector<std::string>& overrides = {});
RunConfig load_run_config(const std::filesystem::path& path,
                          const std::vector<std::string>& overrides = {});

}  // namespace mgh::app
