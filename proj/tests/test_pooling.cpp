#include <cmath>
#include <random>

#include "common/errors.hpp"
#include "doctest.h"
#include "pooling/pooling.hpp"
#include "support/gradcheck.hpp"

using namespace mgh;
using namespace mgh::pool;
using num::Tensor;
using testing::random_tensor;

namespace {

Tensor uniform_attention(std::size_t heads, std::size_t k) {
  Tensor a({heads, k, k});
  a.fill(1.0 / static_cast<double>(k));
  return a;
}

Tensor hand_attention() {
  return Tensor({1, 2, 2}, {0.9, 0.1, 0.5, 0.5});
}

// Row-stochastic attention drawn from random logits.
Tensor random_attention(std::size_t heads, std::size_t k, std::mt19937_64& rng) {
  Tensor a = random_tensor({heads, k, k}, rng, -2, 2);
  for (std::size_t h = 0; h < heads; ++h)
    for (std::size_t i = 0; i < k; ++i) {
      double s = 0;
      for (std::size_t j = 0; j < k; ++j) s += (a.at(h, i, j) = std::exp(a.at(h, i, j)));
      for (std::size_t j = 0; j < k; ++j) a.at(h, i, j) /= s;
    }
  return a;
}

}  // namespace

TEST_CASE("uniform attention gives equal weights") {
  for (std::size_t heads : {1, 3}) {
    const auto w = ata_weights(uniform_attention(heads, 3));
    for (double r : w.raw) CHECK(std::abs(r - heads * 3 * std::log(2.0)) < 1e-12);
    for (double n : w.normalized) CHECK(std::abs(n - 1.0 / 3) < 1e-12);
  }
}

TEST_CASE("hand example, incoming") {
  const auto w = ata_weights(hand_attention(), AtaDirection::incoming);
  CHECK(std::abs(w.raw[0] - (std::log(2.8) + std::log(2.0))) < 1e-12);
  CHECK(std::abs(w.raw[1] - (std::log(1.2) + std::log(2.0))) < 1e-12);
  CHECK(std::abs(w.raw[0] - 1.7228) < 1e-4);
  CHECK(std::abs(w.raw[1] - 0.8755) < 1e-4);
  CHECK(std::abs(w.normalized[0] - 0.6631) < 1e-4);
  CHECK(std::abs(w.normalized[1] - 0.3369) < 1e-4);
}

TEST_CASE("hand example, literal") {
  const auto w = ata_weights(hand_attention(), AtaDirection::literal);
  CHECK(std::abs(w.raw[0] - (std::log(2.8) + std::log(1.2))) < 1e-12);
  CHECK(std::abs(w.raw[1] - 2 * std::log(2.0)) < 1e-12);
  CHECK(std::abs(w.normalized[0] - 0.4665) < 1e-4);
  CHECK(std::abs(w.normalized[1] - 0.5335) < 1e-4);
}

TEST_CASE("normalized weights do not depend on the log base") {
  std::mt19937_64 rng(4);
  for (auto dir : {AtaDirection::incoming, AtaDirection::literal}) {
    const auto a = random_attention(3, 7, rng);
    const auto e = ata_weights(a, dir, std::numbers::e);
    const auto two = ata_weights(a, dir, 2.0);
    const auto ten = ata_weights(a, dir, 10.0);
    for (std::size_t i = 0; i < e.normalized.size(); ++i) {
      CHECK(std::abs(e.normalized[i] - two.normalized[i]) < 1e-12);
      CHECK(std::abs(e.normalized[i] - ten.normalized[i]) < 1e-12);
    }
    double s = 0;
    for (double v : e.normalized) s += v;
    CHECK(std::abs(s - 1.0) < 1e-9);
  }
}

TEST_CASE("malformed attention is rejected") {
  CHECK_THROWS_AS(ata_weights(Tensor({1, 2, 2}, {0.9, 0.2, 0.5, 0.5})), ContractError);
  CHECK_THROWS_AS(ata_weights(Tensor({1, 2, 3})), ShapeError);
  CHECK_THROWS_AS(ata_weights(Tensor({1, 2, 2}, {1.1, -0.1, 0.5, 0.5})), ContractError);
}

TEST_CASE("uniform attention reduces ata to mean") {
  std::mt19937_64 rng(5);
  for (std::size_t k : {1, 2, 5, 17}) {
    num::Tape t;
    enc::EncoderOutput out{t.constant(random_tensor({k, 6}, rng)), t.constant(uniform_attention(4, k))};
    CHECK(num::max_abs_diff(pool_ata(out).value(), pool_mean(out).value()) < 1e-9);
  }
}

TEST_CASE("single token pools to itself") {
  num::Tape t;
  std::mt19937_64 rng(6);
  enc::EncoderOutput out{t.constant(random_tensor({1, 5}, rng)), t.constant(uniform_attention(2, 1))};
  const auto row0 = out.hidden.value().reshaped({5});
  CHECK(pool_ata(out).value() == row0);
  CHECK(pool_mean(out).value() == row0);
  CHECK(pool_last(out).value() == row0);
}

TEST_CASE("ata is the weighted row sum") {
  num::Tape t;
  const Tensor hidden = Tensor::matrix({{1.0, -2.0, 0.5}, {3.0, 4.0, -1.0}});
  enc::EncoderOutput out{t.constant(hidden), t.constant(hand_attention())};
  const auto v = pool_ata(out).value();
  const auto w = ata_weights(hand_attention());
  for (std::size_t c = 0; c < 3; ++c) {
    double expect = 0;
    for (std::size_t i = 0; i < 2; ++i) expect += w.normalized[i] * hidden.at(i, c);
    CHECK(std::abs(v[c] - expect) < 1e-12);
    CHECK(std::abs(v[c] - (0.6631 * hidden.at(0, c) + 0.3369 * hidden.at(1, c))) < 1e-3);
  }
}

TEST_CASE("mean and last pooling") {
  num::Tape t;
  enc::EncoderOutput out{t.constant(Tensor::matrix({{1, 1}, {3, 3}})), t.constant(uniform_attention(1, 2))};
  CHECK(pool_mean(out).value() == Tensor::vector({2, 2}));
  CHECK(pool_last(out).value() == Tensor::vector({3, 3}));
  enc::EncoderOutput swapped{t.constant(Tensor::matrix({{3, 3}, {1, 1}})), out.attention};
  CHECK(pool_mean(swapped).value() == Tensor::vector({2, 2}));
  enc::EncoderOutput changed{t.constant(Tensor::matrix({{-9, 7}, {3, 3}})), out.attention};
  CHECK(pool_last(changed).value() == Tensor::vector({3, 3}));
}

TEST_CASE("more received attention means more weight") {
  // Move mass toward key 1 in one query row while keeping rows stochastic.
  double prev = -1;
  for (double m : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    Tensor a({1, 3, 3}, {0.2, 0.3, 0.5, 1 - m - 0.05, m, 0.05, 0.4, 0.4, 0.2});
    const double w = ata_weights(a).raw[1];
    CHECK(w > prev);
    prev = w;
  }
}

TEST_CASE("raw weight grows with length, normalized does not") {
  for (std::size_t k : {2, 4, 8}) {
    const auto w = ata_weights(uniform_attention(2, k));
    CHECK(std::abs(w.raw[0] - 2.0 * k * std::log(2.0)) < 1e-9);
    CHECK(std::abs(w.normalized[0] - 1.0 / k) < 1e-12);
  }
}

TEST_CASE("pooling gradients match finite differences") {
  std::mt19937_64 rng(8);
  for (auto kind : {PoolingKind::mean, PoolingKind::last, PoolingKind::ata}) {
    for (auto dir : {AtaDirection::incoming, AtaDirection::literal}) {
      // Finite differences see through a detach, so only the attached path is checked here.
      PoolingSpec spec{kind, {dir, false, std::numbers::e}};
      auto f = [spec](num::Tape&, const std::vector<num::Var>& v) {
        enc::EncoderOutput out{v[0], num::softmax_lastdim(v[1])};
        return testing::project(mgh::pool::pool(out, spec), 31);
      };
      CAPTURE(to_string(kind));
      CHECK(testing::gradcheck(f, {random_tensor({4, 3}, rng), random_tensor({2, 4, 4}, rng)}) < 1e-4);
    }
  }
}

TEST_CASE("stop gradient leaves only the hidden path") {
  std::mt19937_64 rng(9);
  num::Tape t;
  auto h = t.leaf(random_tensor({3, 2}, rng));
  auto logits = t.leaf(random_tensor({1, 3, 3}, rng));
  enc::EncoderOutput out{h, num::softmax_lastdim(logits)};
  t.backward(testing::project(pool_ata(out, {AtaDirection::incoming, true}), 3));
  CHECK(t.grad(logits) == nullptr);
  CHECK(t.grad(h) != nullptr);
}

TEST_CASE("names parse") {
  CHECK(parse_pooling("ata") == PoolingKind::ata);
  CHECK(parse_direction("literal") == AtaDirection::literal);
  CHECK_THROWS_AS(parse_pooling("max"), ConfigError);
}
