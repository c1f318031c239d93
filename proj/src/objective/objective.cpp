#include "objective/objective.hpp"

#include <cmath>
#include <string>

#include "common/errors.hpp"

namespace mgh::obj {

using num::Tensor;
using num::Var;

TemperatureMode parse_temperature_mode(std::string_view s) {
  if (s == "multiplicative") return TemperatureMode::multiplicative;
  if (s == "divisive") return TemperatureMode::divisive;
  throw ConfigError("unknown temperature mode '" + std::string(s) + "'");
}

const char* to_string(TemperatureMode mode) {
  return mode == TemperatureMode::multiplicative ? "multiplicative" : "divisive";
}

namespace {

constexpr double kMinNorm = 1e-12;

double norm(std::span<const double> u) {
  double s = 0.0;
  for (double v : u) s += v * v;
  return std::sqrt(s);
}

}  // namespace

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw ShapeError("cosine: lengths " + std::to_string(u.size()) + " and " +
                     std::to_string(v.size()) + " differ");
  }
  const double nu = norm(u), nv = norm(v);
  if (nu <= kMinNorm || nv <= kMinNorm) throw DegenerateInputError("cosine of a zero-norm vector");
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) d += u[i] * v[i];
  return d / (nu * nv);
}

Var cosine(Var u, Var v) {
  if (&u.tape() != &v.tape()) throw ContractError("cosine operands live on different tapes");
  const double c = cosine(u.value().data(), v.value().data());
  return u.tape().record(Tensor::scalar(c), {u, v}, [u, v, c](num::Tape& t, const Tensor& g) {
    const Tensor& uv = t.value(u);
    const Tensor& vv = t.value(v);
    const double nu = norm(uv.data()), nv = norm(vv.data());
    // ∂c/∂u = v/(|u||v|) − c·u/|u|²
    if (Tensor* gu = t.sink(u)) {
      for (std::size_t i = 0; i < uv.size(); ++i)
        (*gu)[i] += g[0] * (vv[i] / (nu * nv) - c * uv[i] / (nu * nu));
    }
    if (Tensor* gv = t.sink(v)) {
      for (std::size_t i = 0; i < vv.size(); ++i)
        (*gv)[i] += g[0] * (uv[i] / (nu * nv) - c * vv[i] / (nv * nv));
    }
  });
}

Var info_nce(const ContrastiveBatch& batch, const InfoNceOptions& options) {
  const std::size_t b = batch.queries.size();
  if (b == 0) throw ContractError("info_nce: empty batch");
  if (batch.positives.size() != b) throw ContractError("info_nce: queries and positives differ in length");
  const bool has_hard = !batch.hard_negatives.empty();
  if (has_hard && batch.hard_negatives.size() != b) {
    throw ContractError("info_nce: hard negatives must align with queries");
  }
  if (!(options.temperature > 0.0) || !std::isfinite(options.temperature)) {
    throw ContractError("info_nce: temperature must be positive");
  }
  const double s = options.mode == TemperatureMode::multiplicative ? options.temperature
                                                                    : 1.0 / options.temperature;
  std::vector<Var> item_losses;
  item_losses.reserve(b);
  for (std::size_t i = 0; i < b; ++i) {
    std::vector<Var> logits;
    const Var& q = batch.queries[i];
    logits.push_back(num::scale(cosine(q, batch.positives[i]), s));
    if (has_hard) logits.push_back(num::scale(cosine(q, batch.hard_negatives[i]), s));
    for (std::size_t j = 0; j < b; ++j) {
      if (j == i) continue;
      if (options.in_batch_negatives) logits.push_back(num::scale(cosine(q, batch.positives[j]), s));
      if (has_hard && options.include_other_hard_negatives) {
        logits.push_back(num::scale(cosine(q, batch.hard_negatives[j]), s));
      }
    }
    Var stacked = num::stack(logits);
    item_losses.push_back(num::sub(num::logsumexp(stacked), num::index(stacked, 0)));
  }
  return num::scale(num::add_n(item_losses), 1.0 / static_cast<double>(b));
}

}  // namespace mgh::obj
