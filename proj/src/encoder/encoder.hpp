#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "encoder/tokenizer.hpp"
#include "json.hpp"
#include "numkit/ops.hpp"

namespace mgh::enc {

struct EncoderConfig {
  int num_layers = 2;
  int num_heads = 4;
  int model_dim = 64;
  int ff_dim = 128;
  int vocab_size = kByteVocabSize;
  int max_seq_len = 64;
  std::uint64_t seed = 0;

  int head_dim() const { return model_dim / num_heads; }
  // Throws ConfigError listing every violated constraint.
  void validate() const;

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

nlohmann::json to_json(const EncoderConfig& cfg);
// Missing keys keep their defaults; unknown keys are rejected.
EncoderConfig encoder_config_from_json(const nlohmann::json& j);

struct NamedTensor {
  std::string name;
  num::Tensor value;
};

// Canonical parameter names and shapes, in storage order.
std::vector<std::pair<std::string, num::Shape>> parameter_layout(const EncoderConfig& cfg);
std::size_t parameter_count(const EncoderConfig& cfg);

// Parameters of a bidirectional pre-norm transformer encoder. Immutable
// during encoding; the trainer mutates it between steps.
class Encoder {
 public:
  Encoder() = default;
  Encoder(EncoderConfig cfg, std::vector<NamedTensor> params);

  const EncoderConfig& config() const { return cfg_; }
  bool initialized() const { return !params_.empty(); }

  std::span<const NamedTensor> params() const { return params_; }
  std::span<NamedTensor> params() { return params_; }
  const num::Tensor& param(std::string_view name) const;
  num::Tensor& param(std::string_view name);
  std::size_t parameter_count() const;

 private:
  EncoderConfig cfg_;
  std::vector<NamedTensor> params_;
};

// Matrices and embeddings ~ N(0, 1/√model_dim); biases zero; norm gains one.
Encoder init_params(const EncoderConfig& cfg);

struct EncoderOutput {
  num::Var hidden;     // [K × model_dim]
  num::Var attention;  // [heads × K × K], last layer, rows sum to one
};

// An encoder's parameters registered as leaves on one tape.
struct BoundEncoder {
  const Encoder* model = nullptr;
  std::vector<num::Var> params;  // parameter_layout order
};

BoundEncoder bind(const Encoder& model, num::Tape& tape, bool requires_grad);

EncoderOutput encode(const BoundEncoder& bound, const TokenSequence& tokens);
EncoderOutput encode(const Encoder& model, const TokenSequence& tokens, num::Tape& tape);

}  // namespace mgh::enc
