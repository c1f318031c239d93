#include "curriculum/curriculum.hpp"

#include <random>
#include <string>

#include "common/errors.hpp"

namespace mgh::cur {

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::curriculum: return "curriculum";
    case Strategy::reverse: return "reverse";
    case Strategy::random: return "random";
    case Strategy::fixed: return "fixed";
  }
  return "?";
}

Strategy parse_strategy(std::string_view s) {
  if (s == "curriculum") return Strategy::curriculum;
  if (s == "reverse") return Strategy::reverse;
  if (s == "random") return Strategy::random;
  if (s == "fixed") return Strategy::fixed;
  throw ConfigError("unknown schedule strategy '" + std::string(s) + "'");
}

Schedule Schedule::build(const ScheduleSpec& spec) {
  if (spec.num_levels < 1) throw ConfigError("num_levels must be at least 1");
  const auto levels = static_cast<std::size_t>(spec.num_levels);
  if (spec.total_steps < levels) {
    throw ConfigError("total_steps (" + std::to_string(spec.total_steps) +
                      ") must be at least num_levels (" + std::to_string(levels) + ")");
  }
  const std::size_t n = spec.total_steps;
  Schedule s;
  s.spec_ = spec;
  s.levels_.resize(n);
  switch (spec.strategy) {
    case Strategy::curriculum:
    case Strategy::reverse: {
      // Block m (1-based) ends at ⌊n·m/L⌋ and carries level L+1−m.
      std::size_t begin = 0;
      for (std::size_t m = 1; m <= levels; ++m) {
        const std::size_t end = n * m / levels;
        for (std::size_t t = begin; t < end; ++t) {
          s.levels_[t] = static_cast<int>(levels + 1 - m);
        }
        begin = end;
      }
      if (spec.strategy == Strategy::reverse) {
        std::vector<int> mirrored(s.levels_.rbegin(), s.levels_.rend());
        s.levels_ = std::move(mirrored);
      }
      break;
    }
    case Strategy::random: {
      std::mt19937_64 rng(spec.seed);
      std::uniform_int_distribution<int> pick(1, spec.num_levels);
      for (auto& l : s.levels_) l = pick(rng);
      break;
    }
    case Strategy::fixed:
      if (spec.fixed_level < 1 || spec.fixed_level > spec.num_levels) {
        throw ConfigError("fixed level " + std::to_string(spec.fixed_level) + " outside [1, " +
                          std::to_string(spec.num_levels) + "]");
      }
      for (auto& l : s.levels_) l = spec.fixed_level;
      break;
  }
  return s;
}

int Schedule::level_at(std::size_t step) const {
  if (step < 1 || step > levels_.size()) {
    throw ContractError("step " + std::to_string(step) + " outside [1, " +
                        std::to_string(levels_.size()) + "]");
  }
  return levels_[step - 1];
}

std::vector<Block> Schedule::blocks() const {
  std::vector<Block> out;
  for (std::size_t t = 0; t < levels_.size(); ++t) {
    if (!out.empty() && out.back().level == levels_[t]) {
      out.back().last = t + 1;
    } else {
      out.push_back({levels_[t], t + 1, t + 1});
    }
  }
  return out;
}

nlohmann::json Schedule::to_json() const {
  nlohmann::json j;
  j["strategy"] = to_string(spec_.strategy);
  j["total_steps"] = spec_.total_steps;
  j["num_levels"] = spec_.num_levels;
  if (spec_.strategy == Strategy::random) j["seed"] = spec_.seed;
  if (spec_.strategy == Strategy::fixed) j["fixed_level"] = spec_.fixed_level;
  std::vector<int> counts(static_cast<std::size_t>(spec_.num_levels), 0);
  for (int l : levels_) ++counts[static_cast<std::size_t>(l - 1)];
  j["level_counts"] = counts;
  nlohmann::json blocks = nlohmann::json::array();
  // Random schedules fragment into thousands of runs; the counts suffice.
  if (spec_.strategy != Strategy::random) {
    for (const auto& b : this->blocks()) {
      blocks.push_back({{"level", b.level}, {"first_step", b.first}, {"last_step", b.last}});
    }
    j["blocks"] = blocks;
  }
  return j;
}

}  // namespace mgh::cur
