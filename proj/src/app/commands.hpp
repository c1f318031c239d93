#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "app/run_config.hpp"
#include "common/errors.hpp"
#include "evalkit/evalkit.hpp"
#include "json.hpp"

namespace mgh::app {

// Process exit status per failure class.
int exit_code(ErrorKind kind);

// Configured backend wrapped with retries and the parallelism bound.
struct BackendStack {
  std::unique_ptr<synth::ChatBackend> inner;
  std::unique_ptr<synth::ResilientBackend> resilient;

  synth::ChatBackend& get() { return *resilient; }
};
BackendStack make_backend(const RunConfig& cfg);

// Each command writes its artifacts under cfg.output_dir and returns a
// JSON summary.
nlohmann::json cmd_synth(const RunConfig& cfg);
nlohmann::json cmd_augment(const RunConfig& cfg);
nlohmann::json cmd_train(const RunConfig& cfg);
nlohmann::json cmd_eval(const RunConfig& cfg);

eval::WeightReport cmd_inspect(const std::filesystem::path& checkpoint, const std::string& text,
                               pool::AtaDirection direction = pool::AtaDirection::incoming);

}  // namespace mgh::app
