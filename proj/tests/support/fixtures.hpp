#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "synth/mock_backend.hpp"
#include "synth/pipeline.hpp"

namespace mgh::testing {

inline std::vector<synth::TrainingTriplet> mock_triplets(std::size_t n, std::uint64_t seed) {
  synth::MockBackend backend({seed});
  synth::SynthConfig cfg;
  cfg.count = n;
  cfg.seed = seed;
  cfg.max_parallel = 1;
  synth::SynthesisReport report;
  return synth::synthesize(cfg, backend, report);
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "mgh_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace mgh::testing
