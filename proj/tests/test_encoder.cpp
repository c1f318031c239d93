#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "common/errors.hpp"
#include "doctest.h"
#include "encoder/checkpoint.hpp"
#include "encoder/encoder.hpp"
#include "encoder/tokenizer.hpp"
#include "support/gradcheck.hpp"

using namespace mgh;
using namespace mgh::enc;

namespace {

EncoderConfig small_config(std::uint64_t seed = 7) {
  EncoderConfig c;
  c.num_layers = 2;
  c.num_heads = 2;
  c.model_dim = 8;
  c.ff_dim = 12;
  c.max_seq_len = 16;
  c.seed = seed;
  return c;
}

std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "mgh_test_encoder";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("tokenize examples") {
  CHECK(tokenize("ab", 64).ids == std::vector<int>{256, 97, 98, 257});
  CHECK(tokenize("", 64).ids == std::vector<int>{256, 257});
  const auto long_seq = tokenize(std::string(10000, 'x'), 64);
  CHECK(long_seq.size() == 64);
  CHECK(long_seq.ids.back() == 257);
  CHECK(long_seq.ids.front() == 256);
}

TEST_CASE("tokenize keeps raw bytes of UTF-8 input") {
  const auto t = tokenize("\xc3\xa9", 8);
  CHECK(t.ids == std::vector<int>{256, 0xc3, 0xa9, 257});
}

TEST_CASE("single token attends only to itself") {
  auto cfg = small_config();
  cfg.num_heads = 4;
  const auto model = init_params(cfg);
  num::Tape tape;
  TokenSequence one{{kEosId}};
  const auto out = encode(model, one, tape);
  const auto& a = out.attention.value();
  REQUIRE(a.shape() == num::Shape{4, 1, 1});
  for (std::size_t h = 0; h < 4; ++h) CHECK(a.at(h, 0, 0) == 1.0);
  CHECK(out.hidden.shape() == num::Shape{1, 8});
}

TEST_CASE("attention rows are distributions") {
  const auto model = init_params(small_config());
  num::Tape tape;
  const auto out = encode(model, tokenize("rows of attention", 16), tape);
  const auto& a = out.attention.value();
  const std::size_t k = a.dim(1);
  for (std::size_t h = 0; h < a.dim(0); ++h)
    for (std::size_t i = 0; i < k; ++i) {
      double s = 0;
      for (std::size_t j = 0; j < k; ++j) {
        CHECK(a.at(h, i, j) >= 0.0);
        CHECK(a.at(h, i, j) <= 1.0);
        s += a.at(h, i, j);
      }
      CHECK(std::abs(s - 1.0) < 1e-9);
    }
}

TEST_CASE("encoding is deterministic") {
  const auto model = init_params(small_config());
  num::Tape t1, t2;
  const auto toks = tokenize("same input", 16);
  const auto a = encode(model, toks, t1), b = encode(model, toks, t2);
  CHECK(a.hidden.value() == b.hidden.value());
  CHECK(a.attention.value() == b.attention.value());
}

TEST_CASE("init is reproducible and seed sensitive") {
  const auto a = init_params(small_config(7)), b = init_params(small_config(7));
  const auto c = init_params(small_config(8));
  CHECK(serialize_checkpoint(a) == serialize_checkpoint(b));
  bool same = true;
  for (std::size_t i = 0; i < a.params().size(); ++i) {
    CHECK(a.params()[i].value == b.params()[i].value);
    same = same && a.params()[i].value == c.params()[i].value;
  }
  CHECK_FALSE(same);
}

TEST_CASE("parameter count matches closed form") {
  for (auto cfg : {small_config(), EncoderConfig{}}) {
    const std::size_t d = cfg.model_dim, f = cfg.ff_dim, v = cfg.vocab_size, s = cfg.max_seq_len;
    // embeddings; per layer: q,k,v,o weights+biases, two norms, two ff layers; final norm
    const std::size_t expect =
        v * d + s * d + cfg.num_layers * (4 * (d * d + d) + 2 * 2 * d + (d * f + f) + (f * d + d)) +
        2 * d;
    const auto model = init_params(cfg);
    std::size_t walked = 0;
    for (const auto& p : model.params()) walked += p.value.size();
    CHECK(walked == expect);
    CHECK(model.parameter_count() == expect);
    CHECK(parameter_count(cfg) == expect);
  }
}

TEST_CASE("invalid config lists violations") {
  EncoderConfig c = small_config();
  c.model_dim = 10;
  c.num_heads = 4;
  c.max_seq_len = 0;
  try {
    init_params(c);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("divisible") != std::string::npos);
    CHECK(msg.find("max_seq_len") != std::string::npos);
  }
}

TEST_CASE("uninitialized model is a contract error") {
  Encoder empty;
  num::Tape tape;
  CHECK_THROWS_AS(encode(empty, tokenize("x", 8), tape), ContractError);
}

TEST_CASE("later tokens influence earlier hidden states") {
  const auto model = init_params(small_config());
  num::Tape tape;
  const auto bound = bind(model, tape, true);
  const auto toks = tokenize("bidirectional", 16);
  const auto out = encode(bound, toks);
  tape.backward(testing::project(num::row(out.hidden, 0), 5));
  const auto g = tape.grad_or_zeros(bound.params[1]);  // positional embeddings
  double last = 0;
  for (double v : g.row(toks.size() - 1)) last += std::abs(v);
  CHECK(last > 1e-8);
}

TEST_CASE("checkpoint round trip") {
  const auto model = init_params(small_config());
  const auto path = temp_path("roundtrip.ckpt");
  save_checkpoint(model, path);
  const auto back = load_checkpoint(path);
  CHECK(back.config() == model.config());
  REQUIRE(back.params().size() == model.params().size());
  for (std::size_t i = 0; i < back.params().size(); ++i) {
    CHECK(back.params()[i].name == model.params()[i].name);
    CHECK(back.params()[i].value == model.params()[i].value);
  }
  CHECK(serialize_checkpoint(back) == serialize_checkpoint(model));
}

TEST_CASE("corrupt checkpoints name the failing field") {
  const auto bytes = serialize_checkpoint(init_params(small_config()));
  auto field_of = [](const std::string& b) -> std::string {
    try {
      deserialize_checkpoint(b);
    } catch (const FormatError& e) {
      return e.field();
    }
    return "";
  };
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK(field_of(bad_magic) == "magic");
  std::string bad_version = bytes;
  bad_version[8] = 9;
  CHECK(field_of(bad_version) == "version");
  CHECK(field_of(bytes.substr(0, 6)) == "magic");
  CHECK(field_of(bytes + "z") == "trailing");
  CHECK_FALSE(field_of(bytes.substr(0, bytes.size() - 3)).empty());
}

TEST_CASE("missing checkpoint is a file error") {
  CHECK_THROWS_AS(load_checkpoint(temp_path("absent.ckpt")), FileError);
}

TEST_CASE("encoder config json rejects unknown keys") {
  CHECK(encoder_config_from_json(to_json(small_config())) == small_config());
  CHECK_THROWS_AS(encoder_config_from_json({{"depth", 3}}), ConfigError);
}
