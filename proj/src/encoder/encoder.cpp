#include "encoder/encoder.hpp"

#include <cmath>
#include <random>

#include "common/errors.hpp"

namespace mgh::enc {

using num::Shape;
using num::Tensor;
using num::Var;

void EncoderConfig::validate() const {
  std::vector<std::string> bad;
  if (num_layers < 1) bad.push_back("num_layers >= 1");
  if (num_heads < 1) bad.push_back("num_heads >= 1");
  if (model_dim < 1) bad.push_back("model_dim >= 1");
  if (num_heads >= 1 && model_dim >= 1 && model_dim % num_heads != 0) {
    bad.push_back("model_dim divisible by num_heads");
  }
  if (ff_dim < 1) bad.push_back("ff_dim >= 1");
  if (vocab_size < kByteVocabSize) {
    bad.push_back("vocab_size >= " + std::to_string(kByteVocabSize));
  }
  if (max_seq_len < 1) bad.push_back("max_seq_len >= 1");
  if (bad.empty()) return;
  std::string msg = "invalid encoder config, violated:";
  for (const auto& b : bad) msg += " [" + b + "]";
  throw ConfigError(msg);
}

nlohmann::json to_json(const EncoderConfig& c) {
  return {{"num_layers", c.num_layers}, {"num_heads", c.num_heads},
          {"model_dim", c.model_dim},   {"ff_dim", c.ff_dim},
          {"vocab_size", c.vocab_size}, {"max_seq_len", c.max_seq_len},
          {"seed", c.seed}};
}

EncoderConfig encoder_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("encoder config must be an object");
  EncoderConfig c;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "num_layers") c.num_layers = value.get<int>();
      else if (key == "num_heads") c.num_heads = value.get<int>();
      else if (key == "model_dim") c.model_dim = value.get<int>();
      else if (key == "ff_dim") c.ff_dim = value.get<int>();
      else if (key == "vocab_size") c.vocab_size = value.get<int>();
      else if (key == "max_seq_len") c.max_seq_len = value.get<int>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else throw ConfigError("unknown encoder config key '" + key + "'");
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("encoder config key '" + key + "': " + e.what());
    }
  }
  return c;
}

std::vector<std::pair<std::string, Shape>> parameter_layout(const EncoderConfig& cfg) {
  const auto d = static_cast<std::size_t>(cfg.model_dim);
  const auto f = static_cast<std::size_t>(cfg.ff_dim);
  std::vector<std::pair<std::string, Shape>> out;
  out.emplace_back("tok_emb", Shape{static_cast<std::size_t>(cfg.vocab_size), d});
  out.emplace_back("pos_emb", Shape{static_cast<std::size_t>(cfg.max_seq_len), d});
  for (int l = 0; l < cfg.num_layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    out.emplace_back(p + "ln1.gamma", Shape{d});
    out.emplace_back(p + "ln1.beta", Shape{d});
    for (const char* m : {"q", "k", "v", "o"}) {
      out.emplace_back(p + "attn.w" + m, Shape{d, d});
      out.emplace_back(p + "attn.b" + m, Shape{d});
    }
    out.emplace_back(p + "ln2.gamma", Shape{d});
    out.emplace_back(p + "ln2.beta", Shape{d});
    out.emplace_back(p + "ff.w1", Shape{d, f});
    out.emplace_back(p + "ff.b1", Shape{f});
    out.emplace_back(p + "ff.w2", Shape{f, d});
    out.emplace_back(p + "ff.b2", Shape{d});
  }
  out.emplace_back("final_ln.gamma", Shape{d});
  out.emplace_back("final_ln.beta", Shape{d});
  return out;
}

std::size_t parameter_count(const EncoderConfig& cfg) {
  const std::size_t d = cfg.model_dim, f = cfg.ff_dim;
  const std::size_t per_layer = 4 * d * d + 4 * d  // attention projections
                                + 4 * d            // two norms
                                + 2 * d * f + f + d;  // feed-forward
  return (cfg.vocab_size + cfg.max_seq_len) * d + cfg.num_layers * per_layer + 2 * d;
}

Encoder::Encoder(EncoderConfig cfg, std::vector<NamedTensor> params)
    : cfg_(cfg), params_(std::move(params)) {
  cfg_.validate();
  const auto layout = parameter_layout(cfg_);
  if (layout.size() != params_.size()) {
    throw ContractError("encoder expects " + std::to_string(layout.size()) +
                        " parameter tensors, got " + std::to_string(params_.size()));
  }
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (params_[i].name != layout[i].first || params_[i].value.shape() != layout[i].second) {
      throw ContractError("parameter " + std::to_string(i) + " is '" + params_[i].name + "' " +
                          num::shape_string(params_[i].value.shape()) + ", expected '" +
                          layout[i].first + "' " + num::shape_string(layout[i].second));
    }
  }
}

const Tensor& Encoder::param(std::string_view name) const {
  for (const auto& p : params_) {
    if (p.name == name) return p.value;
  }
  throw ContractError("no parameter named '" + std::string(name) + "'");
}

Tensor& Encoder::param(std::string_view name) {
  return const_cast<Tensor&>(std::as_const(*this).param(name));
}

std::size_t Encoder::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

Encoder init_params(const EncoderConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(cfg.model_dim)));
  std::vector<NamedTensor> params;
  for (auto& [name, shape] : parameter_layout(cfg)) {
    Tensor t(shape);
    const bool is_gain = name.ends_with(".gamma");
    const bool is_vector = shape.size() == 1;
    if (is_gain) {
      t.fill(1.0);
    } else if (!is_vector) {
      for (auto& v : t.data()) v = normal(rng);
    }
    params.push_back({std::move(name), std::move(t)});
  }
  return Encoder(cfg, std::move(params));
}

BoundEncoder bind(const Encoder& model, num::Tape& tape, bool requires_grad) {
  if (!model.initialized()) throw ContractError("encoder is not initialized");
  BoundEncoder b;
  b.model = &model;
  b.params.reserve(model.params().size());
  for (const auto& p : model.params()) b.params.push_back(tape.leaf(p.value, requires_grad));
  return b;
}

namespace {

// Parameter slots inside one layer, matching parameter_layout.
enum LayerSlot {
  kLn1G, kLn1B, kWq, kBq, kWk, kBk, kWv, kBv, kWo, kBo,
  kLn2G, kLn2B, kW1, kB1, kW2, kB2, kSlotsPerLayer
};

}  // namespace

EncoderOutput encode(const BoundEncoder& bound, const TokenSequence& tokens) {
  if (bound.model == nullptr || !bound.model->initialized()) {
    throw ContractError("encoder is not initialized");
  }
  const EncoderConfig& cfg = bound.model->config();
  if (tokens.empty()) throw ContractError("encode: empty token sequence");
  const std::size_t k = tokens.size();
  if (k > static_cast<std::size_t>(cfg.max_seq_len)) {
    throw ContractError("encode: sequence of " + std::to_string(k) +
                        " tokens exceeds max_seq_len " + std::to_string(cfg.max_seq_len));
  }
  const auto& p = bound.params;
  const std::size_t heads = cfg.num_heads;
  const std::size_t dh = cfg.head_dim();
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));

  Var x = num::add(num::gather_rows(p[0], tokens.ids), num::slice_rows(p[1], 0, k));
  Var last_attention;
  for (int l = 0; l < cfg.num_layers; ++l) {
    const Var* w = &p[2 + static_cast<std::size_t>(l) * kSlotsPerLayer];
    Var h = num::layer_norm(x, w[kLn1G], w[kLn1B]);
    Var q = num::add_row_bias(num::matmul(h, w[kWq]), w[kBq]);
    Var kk = num::add_row_bias(num::matmul(h, w[kWk]), w[kBk]);
    Var v = num::add_row_bias(num::matmul(h, w[kWv]), w[kBv]);
    std::vector<Var> head_out;
    std::vector<Var> head_probs;
    head_out.reserve(heads);
    head_probs.reserve(heads);
    for (std::size_t hd = 0; hd < heads; ++hd) {
      Var qh = num::slice_cols(q, hd * dh, dh);
      Var kh = num::slice_cols(kk, hd * dh, dh);
      Var vh = num::slice_cols(v, hd * dh, dh);
      Var probs = num::softmax_lastdim(num::scale(num::matmul_nt(qh, kh), inv_sqrt_dh));
      head_probs.push_back(probs);
      head_out.push_back(num::matmul(probs, vh));
    }
    Var attn = heads == 1 ? head_out[0] : num::concat_cols(head_out);
    x = num::add(x, num::add_row_bias(num::matmul(attn, w[kWo]), w[kBo]));
    Var h2 = num::layer_norm(x, w[kLn2G], w[kLn2B]);
    Var ff = num::gelu(num::add_row_bias(num::matmul(h2, w[kW1]), w[kB1]));
    x = num::add(x, num::add_row_bias(num::matmul(ff, w[kW2]), w[kB2]));
    if (l + 1 == cfg.num_layers) last_attention = num::stack(head_probs);
  }
  const std::size_t tail = p.size() - 2;
  Var hidden = num::layer_norm(x, p[tail], p[tail + 1]);
  return {hidden, last_attention};
}

EncoderOutput encode(const Encoder& model, const TokenSequence& tokens, num::Tape& tape) {
  return encode(bind(model, tape, false), tokens);
}

}  // namespace mgh::enc
