#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "numkit/ops.hpp"

namespace mgh::obj {

// multiplicative: logits are τ·φ. divisive: logits are φ/τ.
enum class TemperatureMode { multiplicative, divisive };

TemperatureMode parse_temperature_mode(std::string_view s);
const char* to_string(TemperatureMode mode);

struct InfoNceOptions {
  double temperature = 1.0;
  TemperatureMode mode = TemperatureMode::multiplicative;
  // Other items' positives join each item's negative set.
  bool in_batch_negatives = true;
  // Other items' hard negatives join as well (off by default).
  bool include_other_hard_negatives = false;
};

// Aligned by index. hard_negatives is either empty (no hard negatives) or
// the same length as queries.
struct ContrastiveBatch {
  std::vector<num::Var> queries;
  std::vector<num::Var> positives;
  std::vector<num::Var> hard_negatives;
};

double cosine(std::span<const double> u, std::span<const double> v);
num::Var cosine(num::Var u, num::Var v);

// Mean over items of −log(e^{s⁺} / (e^{s⁺} + Σ_{d⁻∈N} e^{s⁻})), evaluated as
// logsumexp over [s⁺, s⁻...] minus s⁺.
num::Var info_nce(const ContrastiveBatch& batch, const InfoNceOptions& options);

}  // namespace mgh::obj
