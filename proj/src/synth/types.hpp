#pragma once

#include <array>
#include <cstddef>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace mgh::synth {

enum class TaskCategory { short_long, long_short, long_long, short_short, sts };

inline constexpr std::array<TaskCategory, 5> kAllCategories = {
    TaskCategory::short_long, TaskCategory::long_short, TaskCategory::long_long,
    TaskCategory::short_short, TaskCategory::sts};

const char* to_string(TaskCategory c);
TaskCategory parse_category(std::string_view s);

struct TaskSpec {
  TaskCategory category = TaskCategory::short_long;
  std::string description;

  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

// Stage-2 prompt placeholders; every field except language comes from a
// fixed enumerated set.
struct PromptPlaceholders {
  std::string query_type;
  std::string query_length;
  std::string clarity;
  int num_words = 50;
  std::string difficulty;
  std::string language = "English";
};

namespace placeholder_sets {
inline constexpr std::array<std::string_view, 3> kQueryType = {"extremely long-tail",
                                                               "long-tail", "common"};
inline constexpr std::array<std::string_view, 3> kQueryLength = {
    "less than 5 words", "5 to 15 words", "at least 10 words"};
inline constexpr std::array<std::string_view, 3> kClarity = {
    "clear", "understandable with some effort", "ambiguous"};
inline constexpr std::array<int, 6> kNumWords = {50, 100, 200, 300, 400, 500};
inline constexpr std::array<std::string_view, 3> kDifficulty = {"high school", "college", "PhD"};
}  // namespace placeholder_sets

// Uniform draw from each enumerated set.
PromptPlaceholders sample_placeholders(std::mt19937_64& rng, const std::string& language);
// Throws ConfigError when a field falls outside its set.
void validate_placeholders(const PromptPlaceholders& ph);

enum class Source { synthetic, retrieval_augmented };

const char* to_string(Source s);
Source parse_source(std::string_view s);

// One query, its positive, and negatives ordered hardest (k=1) first.
struct TrainingTriplet {
  std::string query;
  std::string positive;
  std::vector<std::string> negatives;
  Source source = Source::synthetic;
  TaskSpec task;

  friend bool operator==(const TrainingTriplet&, const TrainingTriplet&) = default;
};

inline constexpr std::size_t kDefaultNumLevels = 4;

// Similarity tags expected per negative position: high, medium..., low.
std::vector<std::string> level_tags(std::size_t num_levels);

// Throws ValidationError with violation codes: empty_text, negative_count,
// duplicate_negative, negative_equals_positive.
void validate_triplet(const TrainingTriplet& t, std::size_t num_levels = kDefaultNumLevels);

// Relative share of each category in a synthesis run, indexed like
// kAllCategories.
struct CategoryMix {
  std::array<double, 5> weights = {0.30, 0.25, 0.10, 0.10, 0.25};

  void validate() const;
  // Largest-remainder allocation of `total` requests.
  std::array<std::size_t, 5> allocate(std::size_t total) const;
};

}  // namespace mgh::synth
