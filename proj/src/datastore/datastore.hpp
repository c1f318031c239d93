#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "synth/pipeline.hpp"
#include "synth/types.hpp"

namespace mgh::data {

using synth::TrainingTriplet;

// One JSON object per line:
//   {"user_query", "positive_document",
//    "hard_negative_document": [{"similarity_level", "text"}, ...],
//    "source", "task_category", "task_description"}
nlohmann::ordered_json to_record(const TrainingTriplet& t);
// Throws ValidationError naming the violation.
TrainingTriplet from_record(const nlohmann::json& j, std::size_t num_levels);

std::size_t write_dataset(const std::vector<TrainingTriplet>& triplets,
                          const std::filesystem::path& path);

struct ReadReport {
  std::size_t lines = 0;
  std::size_t accepted = 0;
  std::map<std::string, std::size_t> violations;
  std::vector<std::size_t> bad_lines;  // 1-based

  bool clean() const { return violations.empty(); }
  nlohmann::json to_json() const;
};

struct ReadResult {
  std::vector<TrainingTriplet> triplets;
  ReadReport report;
};

// strict: the first bad line throws ValidationError whose message names the
// line number. Otherwise bad lines are skipped and counted. Blank lines are
// ignored either way.
ReadResult read_dataset(const std::filesystem::path& path, bool strict,
                        std::size_t num_levels = synth::kDefaultNumLevels);

struct PairReadResult {
  std::vector<synth::RetrievalPair> pairs;
  ReadReport report;
};

// Pair file: one {"query", "positive"} object per line.
PairReadResult read_pairs(const std::filesystem::path& path, bool strict);

struct MixInput {
  std::filesystem::path path;
  double weight = 1.0;
};

struct MixSpec {
  std::vector<MixInput> inputs;
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
  double eval_fraction = 0.2;
  std::size_t num_levels = synth::kDefaultNumLevels;

  void validate() const;
};

struct Split {
  std::vector<TrainingTriplet> train;
  std::vector<TrainingTriplet> eval;
};

// Per source: seeded shuffle, then the first share goes to eval. The eval
// total is round(N·eval_fraction), spread over sources by largest
// remainder. Both sides are interleaved by weight: the next record comes
// from the source with the smallest (taken + 1) / weight.
Split mix_and_split(const MixSpec& spec);
// Same, over already-loaded sources.
Split mix_and_split(const std::vector<std::pair<std::vector<TrainingTriplet>, double>>& sources,
                    std::uint64_t seed, double eval_fraction);

// SHA-256 over the canonical serialization of the records.
std::string dataset_digest(const std::vector<TrainingTriplet>& triplets);

}  // namespace mgh::data
