#include "trainer/adam.hpp"

#include <cmath>

#include "common/errors.hpp"

namespace mgh::train {

void Adam::step(std::span<enc::NamedTensor> params, std::span<const num::Tensor> grads, double lr) {
  if (params.size() != grads.size()) {
    throw ContractError("adam: " + std::to_string(params.size()) + " parameters but " +
                        std::to_string(grads.size()) + " gradients");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].value.shape() != grads[i].shape()) {
      throw ContractError("adam: gradient shape " + num::shape_string(grads[i].shape()) +
                          " does not match " + params[i].name + " " +
                          num::shape_string(params[i].value.shape()));
    }
  }
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.value.shape());
      v_.emplace_back(p.value.shape());
    }
  } else if (m_.size() != params.size()) {
    throw ContractError("adam: parameter count changed between steps");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto w = params[i].value.data();
    auto g = grads[i].data();
    auto m = m_[i].data();
    auto v = v_[i].data();
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = opt_.beta1 * m[j] + (1.0 - opt_.beta1) * g[j];
      v[j] = opt_.beta2 * v[j] + (1.0 - opt_.beta2) * g[j] * g[j];
      w[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + opt_.eps);
    }
  }
}

}  // namespace mgh::train
