#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "numkit/ops.hpp"

namespace mgh::testing {

using Builder = std::function<num::Var(num::Tape&, const std::vector<num::Var>&)>;

inline double eval_loss(const Builder& f, const std::vector<num::Tensor>& inputs) {
  num::Tape tape;
  std::vector<num::Var> vars;
  for (const auto& t : inputs) vars.push_back(tape.leaf(t));
  return f(tape, vars).value().item();
}

// Worst per-input relative error ‖g_tape − g_fd‖ / max(‖g_tape‖ + ‖g_fd‖, 1e-12),
// with central differences of step h.
inline double gradcheck(const Builder& f, std::vector<num::Tensor> inputs, double h = 1e-5) {
  num::Tape tape;
  std::vector<num::Var> vars;
  for (const auto& t : inputs) vars.push_back(tape.leaf(t));
  tape.backward(f(tape, vars));
  double worst = 0.0;
  for (std::size_t n = 0; n < inputs.size(); ++n) {
    const num::Tensor analytic = tape.grad_or_zeros(vars[n]);
    double diff = 0.0, na = 0.0, nf = 0.0;
    for (std::size_t i = 0; i < inputs[n].size(); ++i) {
      const double keep = inputs[n][i];
      inputs[n][i] = keep + h;
      const double up = eval_loss(f, inputs);
      inputs[n][i] = keep - h;
      const double down = eval_loss(f, inputs);
      inputs[n][i] = keep;
      const double fd = (up - down) / (2.0 * h);
      diff += (analytic[i] - fd) * (analytic[i] - fd);
      na += analytic[i] * analytic[i];
      nf += fd * fd;
    }
    const double denom = std::max(std::sqrt(na) + std::sqrt(nf), 1e-12);
    worst = std::max(worst, std::sqrt(diff) / denom);
  }
  return worst;
}

inline num::Tensor random_tensor(num::Shape shape, std::mt19937_64& rng, double lo = -1.0,
                                 double hi = 1.0) {
  num::Tensor t(std::move(shape));
  std::uniform_real_distribution<double> d(lo, hi);
  for (auto& v : t.data()) v = d(rng);
  return t;
}

// Random seeded reduction weights so a loss touches every output entry.
inline num::Var project(num::Var x, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto w = random_tensor(x.shape(), rng);
  return num::sum(num::mul(x, x.tape().constant(std::move(w))));
}

}  // namespace mgh::testing
