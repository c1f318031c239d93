#include "synth/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "common/errors.hpp"

namespace mgh::synth {

const char* to_string(TaskCategory c) {
  switch (c) {
    case TaskCategory::short_long: return "short_long";
    case TaskCategory::long_short: return "long_short";
    case TaskCategory::long_long: return "long_long";
    case TaskCategory::short_short: return "short_short";
    case TaskCategory::sts: return "sts";
  }
  return "?";
}

TaskCategory parse_category(std::string_view s) {
  for (auto c : kAllCategories) {
    if (s == to_string(c)) return c;
  }
  throw ConfigError("unknown task category '" + std::string(s) + "'");
}

const char* to_string(Source s) {
  return s == Source::synthetic ? "synthetic" : "retrieval_augmented";
}

Source parse_source(std::string_view s) {
  if (s == "synthetic") return Source::synthetic;
  if (s == "retrieval_augmented") return Source::retrieval_augmented;
  throw ValidationError("source", "unknown source '" + std::string(s) + "'");
}

namespace {

template <typename Set>
auto pick(std::mt19937_64& rng, const Set& set) {
  std::uniform_int_distribution<std::size_t> d(0, set.size() - 1);
  return set[d(rng)];
}

template <typename Set, typename V>
bool contains(const Set& set, const V& v) {
  return std::find(set.begin(), set.end(), v) != set.end();
}

}  // namespace

PromptPlaceholders sample_placeholders(std::mt19937_64& rng, const std::string& language) {
  namespace ps = placeholder_sets;
  PromptPlaceholders ph;
  ph.query_type = pick(rng, ps::kQueryType);
  ph.query_length = pick(rng, ps::kQueryLength);
  ph.clarity = pick(rng, ps::kClarity);
  ph.num_words = pick(rng, ps::kNumWords);
  ph.difficulty = pick(rng, ps::kDifficulty);
  ph.language = language;
  return ph;
}

void validate_placeholders(const PromptPlaceholders& ph) {
  namespace ps = placeholder_sets;
  if (!contains(ps::kQueryType, ph.query_type)) throw ConfigError("query_type '" + ph.query_type + "'");
  if (!contains(ps::kQueryLength, ph.query_length)) {
    throw ConfigError("query_length '" + ph.query_length + "'");
  }
  if (!contains(ps::kClarity, ph.clarity)) throw ConfigError("clarity '" + ph.clarity + "'");
  if (!contains(ps::kNumWords, ph.num_words)) {
    throw ConfigError("num_words " + std::to_string(ph.num_words));
  }
  if (!contains(ps::kDifficulty, ph.difficulty)) throw ConfigError("difficulty '" + ph.difficulty + "'");
  if (ph.language.empty()) throw ConfigError("language must be non-empty");
}

std::vector<std::string> level_tags(std::size_t num_levels) {
  std::vector<std::string> tags(num_levels, "medium");
  if (num_levels >= 1) tags.front() = "high";
  if (num_levels >= 2) tags.back() = "low";
  return tags;
}

void validate_triplet(const TrainingTriplet& t, std::size_t num_levels) {
  if (t.query.empty()) throw ValidationError("empty_text", "query is empty");
  if (t.positive.empty()) throw ValidationError("empty_text", "positive is empty");
  if (t.negatives.size() != num_levels) {
    throw ValidationError("negative_count", "expected " + std::to_string(num_levels) +
                                                " negatives, got " +
                                                std::to_string(t.negatives.size()));
  }
  std::set<std::string_view> seen;
  for (std::size_t k = 0; k < t.negatives.size(); ++k) {
    const auto& n = t.negatives[k];
    if (n.empty()) {
      throw ValidationError("empty_text", "negative " + std::to_string(k + 1) + " is empty");
    }
    if (!seen.insert(n).second) {
      throw ValidationError("duplicate_negative",
                            "negative " + std::to_string(k + 1) + " repeats an earlier one");
    }
    if (n == t.positive) {
      throw ValidationError("negative_equals_positive",
                            "negative " + std::to_string(k + 1) + " equals the positive");
    }
  }
}

void CategoryMix::validate() const {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("category weights must be non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw ConfigError("category weights sum to zero");
}

std::array<std::size_t, 5> CategoryMix::allocate(std::size_t total) const {
  validate();
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::array<std::size_t, 5> counts{};
  std::array<double, 5> remainder{};
  std::size_t used = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    const double exact = static_cast<double>(total) * weights[i] / sum;
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    remainder[i] = exact - static_cast<double>(counts[i]);
    used += counts[i];
  }
  std::array<std::size_t, 5> order = {0, 1, 2, 3, 4};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; used < total; ++i, ++used) ++counts[order[i % 5]];
  return counts;
}

}  // namespace mgh::synth
