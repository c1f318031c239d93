#pragma once

#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "encoder/encoder.hpp"

namespace mgh::pool {

enum class PoolingKind { mean, last, ata };

// incoming: token t collects log(a[h][i][t]·K + 1) over heads h and
// queries i, i.e. the attention it receives as a key.
// literal: token t collects over keys j with t as the query row.
enum class AtaDirection { incoming, literal };

const char* to_string(PoolingKind kind);
const char* to_string(AtaDirection direction);
PoolingKind parse_pooling(std::string_view s);
AtaDirection parse_direction(std::string_view s);

struct AtaOptions {
  AtaDirection direction = AtaDirection::incoming;
  // Treat the anchor weights as constants during backpropagation.
  bool stop_gradient = false;
  double log_base = std::numbers::e;
};

struct PoolingSpec {
  PoolingKind kind = PoolingKind::ata;
  AtaOptions ata;
};

struct AnchorWeights {
  std::vector<double> raw;
  std::vector<double> normalized;
};

// Rejects anything that is not H×K×K with non-negative rows summing to one
// within 1e-6.
void check_attention(const num::Tensor& attention);

AnchorWeights ata_weights(const num::Tensor& attention,
                          AtaDirection direction = AtaDirection::incoming,
                          double log_base = std::numbers::e);

// Differentiable raw weights [K].
num::Var ata_raw_weights(num::Var attention, AtaDirection direction,
                         double log_base = std::numbers::e);

num::Var pool_ata(const enc::EncoderOutput& out, const AtaOptions& options = {});
num::Var pool_mean(const enc::EncoderOutput& out);
num::Var pool_last(const enc::EncoderOutput& out);
num::Var pool(const enc::EncoderOutput& out, const PoolingSpec& spec);

}  // namespace mgh::pool
