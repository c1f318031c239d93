#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace mgh::cur {

// Level 1 is the hardest negative, level num_levels the easiest.
enum class Strategy { curriculum, reverse, random, fixed };

const char* to_string(Strategy s);
Strategy parse_strategy(std::string_view s);

struct ScheduleSpec {
  Strategy strategy = Strategy::curriculum;
  std::size_t total_steps = 0;
  int num_levels = 4;
  std::uint64_t seed = 0;
  int fixed_level = 1;  // only read by Strategy::fixed
};

// A contiguous run of equal levels, steps [first, last] (1-based, inclusive).
struct Block {
  int level;
  std::size_t first;
  std::size_t last;
};

class Schedule {
 public:
  static Schedule build(const ScheduleSpec& spec);

  const ScheduleSpec& spec() const { return spec_; }
  std::size_t total_steps() const { return levels_.size(); }
  int level_at(std::size_t step) const;  // 1-based step
  const std::vector<int>& levels() const { return levels_; }
  std::vector<Block> blocks() const;

  // Strategy parameters plus the run-length block list.
  nlohmann::json to_json() const;

 private:
  ScheduleSpec spec_;
  std::vector<int> levels_;
};

}  // namespace mgh::cur
