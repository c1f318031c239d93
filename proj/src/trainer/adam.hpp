#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "encoder/encoder.hpp"

namespace mgh::train {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam over a fixed parameter list. State tensors are created
// on the first step and must keep matching shapes afterwards.
class Adam {
 public:
  explicit Adam(AdamOptions options = {}) : opt_(options) {}

  void step(std::span<enc::NamedTensor> params, std::span<const num::Tensor> grads, double lr);

  std::size_t steps() const { return t_; }
  const std::vector<num::Tensor>& first_moment() const { return m_; }
  const std::vector<num::Tensor>& second_moment() const { return v_; }

 private:
  AdamOptions opt_;
  std::size_t t_ = 0;
  std::vector<num::Tensor> m_;
  std::vector<num::Tensor> v_;
};

}  // namespace mgh::train
