#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "synth/backend.hpp"
#include "synth/types.hpp"

namespace mgh::synth {

struct GenerationOptions {
  std::string model = "mock";
  double temperature = 1.0;
  std::size_t num_levels = kDefaultNumLevels;
  std::string language = "English";
};

// Stage 1. Case-insensitive dedup; at most n specs, reply order kept.
std::vector<TaskSpec> brainstorm_tasks(TaskCategory category, std::size_t n,
                                       ChatBackend& backend, const GenerationOptions& opt = {});

// Stage 2: render -> call -> parse. On a validation failure the placeholders
// are redrawn from `rng` and the request is sent once more. The violation
// code of every failed attempt is appended to `violations` when given.
TrainingTriplet generate_triplet(const TaskSpec& task, const PromptPlaceholders& ph,
                                 ChatBackend& backend, std::mt19937_64& rng,
                                 const GenerationOptions& opt = {},
                                 std::vector<std::string>* violations = nullptr);

// Asks only for graded negatives of an existing (query, positive) pair.
TrainingTriplet augment_retrieval_pair(const TaskSpec& task, const std::string& query,
                                       const std::string& positive, ChatBackend& backend,
                                       std::mt19937_64& rng, const GenerationOptions& opt = {},
                                       std::vector<std::string>* violations = nullptr);

// Task attached to augmented retrieval pairs when the caller names none.
TaskSpec default_retrieval_task();

struct SynthConfig {
  std::size_t count = 0;
  std::uint64_t seed = 0;
  CategoryMix mix;
  std::size_t tasks_per_category = 20;
  GenerationOptions generation;
  // Worker threads issuing requests; the backend enforces its own bound.
  std::size_t max_parallel = 4;
  // Extra rounds that replace rejected requests until `count` is reached.
  std::size_t max_rounds = 3;

  void validate() const;
};

struct SynthesisReport {
  std::size_t requested = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;          // requests that failed both attempts
  std::size_t validation_retries = 0;
  std::size_t requests = 0;          // stage-2 requests issued (rounds included)
  std::size_t rounds = 0;
  std::map<std::string, std::size_t> tasks_per_category;
  std::map<std::string, std::size_t> violations;  // per failed attempt

  nlohmann::json to_json() const;
};

// Full two-stage run. Output order depends only on (config, backend
// replies), never on thread timing. Throws TransportError when the backend
// gives up and ValidationError("no_records") when nothing was accepted.
std::vector<TrainingTriplet> synthesize(const SynthConfig& cfg, ChatBackend& backend,
                                        SynthesisReport& report);

struct RetrievalPair {
  std::string query;
  std::string positive;
};

// Augments every pair in order; pairs that fail twice are dropped and
// counted as rejected.
std::vector<TrainingTriplet> augment_pairs(const std::vector<RetrievalPair>& pairs,
                                           const TaskSpec& task, const SynthConfig& cfg,
                                           ChatBackend& backend, SynthesisReport& report);

}  // namespace mgh::synth
