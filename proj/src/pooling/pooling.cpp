#include "pooling/pooling.hpp"

#include <cmath>

#include "common/errors.hpp"

namespace mgh::pool {

using num::Tensor;
using num::Var;

const char* to_string(PoolingKind kind) {
  switch (kind) {
    case PoolingKind::mean: return "mean";
    case PoolingKind::last: return "last";
    case PoolingKind::ata: return "ata";
  }
  return "?";
}

const char* to_string(AtaDirection direction) {
  return direction == AtaDirection::incoming ? "incoming" : "literal";
}

PoolingKind parse_pooling(std::string_view s) {
  if (s == "mean") return PoolingKind::mean;
  if (s == "last") return PoolingKind::last;
  if (s == "ata") return PoolingKind::ata;
  throw ConfigError("unknown pooling '" + std::string(s) + "' (expected mean, last or ata)");
}

AtaDirection parse_direction(std::string_view s) {
  if (s == "incoming") return AtaDirection::incoming;
  if (s == "literal") return AtaDirection::literal;
  throw ConfigError("unknown ATA direction '" + std::string(s) +
                    "' (expected incoming or literal)");
}

void check_attention(const Tensor& a) {
  if (a.rank() != 3 || a.dim(1) != a.dim(2)) {
    throw ShapeError("attention must be H×K×K, got " + num::shape_string(a.shape()));
  }
  const std::size_t heads = a.dim(0), k = a.dim(1);
  for (std::size_t h = 0; h < heads; ++h) {
    for (std::size_t i = 0; i < k; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        const double v = a.at(h, i, j);
        if (!(v >= 0.0)) {
          throw ContractError("attention entry [" + std::to_string(h) + "][" + std::to_string(i) +
                              "][" + std::to_string(j) + "] is negative or NaN");
        }
        s += v;
      }
      if (std::abs(s - 1.0) > 1e-6) {
        throw ContractError("attention row [" + std::to_string(h) + "][" + std::to_string(i) +
                            "] sums to " + std::to_string(s) + ", not 1");
      }
    }
  }
}

namespace {

// The per-token reduction is shared by the value and tape paths.
std::vector<double> raw_weights(const Tensor& a, AtaDirection direction, double log_base) {
  if (!(log_base > 0.0) || log_base == 1.0) {
    throw ContractError("log base must be positive and different from 1");
  }
  check_attention(a);
  const std::size_t heads = a.dim(0), k = a.dim(1);
  const double kd = static_cast<double>(k);
  const double inv_ln_base = 1.0 / std::log(log_base);
  std::vector<double> w(k, 0.0);
  for (std::size_t h = 0; h < heads; ++h) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        const double term = std::log1p(a.at(h, i, j) * kd) * inv_ln_base;
        w[direction == AtaDirection::incoming ? j : i] += term;
      }
    }
  }
  return w;
}

}  // namespace

AnchorWeights ata_weights(const Tensor& attention, AtaDirection direction, double log_base) {
  AnchorWeights out;
  out.raw = raw_weights(attention, direction, log_base);
  double s = 0.0;
  for (double v : out.raw) s += v;
  // Every row holds at least one entry ≥ 1/K, so the sum is strictly positive.
  out.normalized.resize(out.raw.size());
  for (std::size_t i = 0; i < out.raw.size(); ++i) out.normalized[i] = out.raw[i] / s;
  return out;
}

Var ata_raw_weights(Var attention, AtaDirection direction, double log_base) {
  const Tensor& a = attention.value();
  std::vector<double> w = raw_weights(a, direction, log_base);
  const std::size_t k = w.size();
  return attention.tape().record(
      Tensor::vector(std::move(w)), {attention},
      [attention, direction, log_base, k](num::Tape& t, const Tensor& g) {
        Tensor* ga = t.sink(attention);
        if (!ga) return;
        const Tensor& av = t.value(attention);
        const std::size_t heads = av.dim(0);
        const double kd = static_cast<double>(k);
        const double inv_ln_base = 1.0 / std::log(log_base);
        for (std::size_t h = 0; h < heads; ++h) {
          for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
              const double up = g[direction == AtaDirection::incoming ? j : i];
              ga->at(h, i, j) += up * kd * inv_ln_base / (av.at(h, i, j) * kd + 1.0);
            }
          }
        }
      });
}

Var pool_ata(const enc::EncoderOutput& out, const AtaOptions& options) {
  Var attention = options.stop_gradient ? num::detach(out.attention) : out.attention;
  const std::size_t k = out.hidden.shape().at(0);
  if (attention.shape().at(1) != k) {
    throw ShapeError("attention length " + std::to_string(attention.shape().at(1)) +
                     " does not match hidden length " + std::to_string(k));
  }
  Var weights = num::normalize_sum(ata_raw_weights(attention, options.direction, options.log_base));
  return num::weighted_rows(weights, out.hidden);
}

Var pool_mean(const enc::EncoderOutput& out) { return num::mean_rows(out.hidden); }

Var pool_last(const enc::EncoderOutput& out) {
  return num::row(out.hidden, out.hidden.shape().at(0) - 1);
}

Var pool(const enc::EncoderOutput& out, const PoolingSpec& spec) {
  switch (spec.kind) {
    case PoolingKind::mean: return pool_mean(out);
    case PoolingKind::last: return pool_last(out);
    case PoolingKind::ata: return pool_ata(out, spec.ata);
  }
  throw ContractError("unknown pooling kind");
}

}  // namespace mgh::pool
