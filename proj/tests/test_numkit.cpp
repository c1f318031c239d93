#include <cmath>
#include <random>

#include "common/errors.hpp"
#include "doctest.h"
#include "numkit/ops.hpp"
#include "support/gradcheck.hpp"

using namespace mgh;
using namespace mgh::num;
using mgh::testing::gradcheck;
using mgh::testing::project;
using mgh::testing::random_tensor;

namespace {

// Plain triple loop, independent of the library kernels.
Tensor naive_matmul(const Tensor& a, const Tensor& b) {
  Tensor c({a.dim(0), b.dim(1)});
  for (std::size_t i = 0; i < a.dim(0); ++i)
    for (std::size_t j = 0; j < b.dim(1); ++j) {
      double s = 0;
      for (std::size_t k = 0; k < a.dim(1); ++k) s += a.at(i, k) * b.at(k, j);
      c.at(i, j) = s;
    }
  return c;
}

}  // namespace

TEST_CASE("matmul examples") {
  Tape t;
  auto id = t.constant(Tensor::matrix({{1, 0}, {0, 1}}));
  auto b = t.constant(Tensor::matrix({{3, 4}, {5, 6}}));
  CHECK(matmul(id, b).value() == b.value());

  auto x = t.constant(Tensor::matrix({{1, 2}, {3, 4}}));
  auto y = t.constant(Tensor::matrix({{5, 6}, {7, 8}}));
  CHECK(matmul(x, y).value() == Tensor::matrix({{19, 22}, {43, 50}}));

  std::mt19937_64 rng(3);
  auto p = random_tensor({5, 7}, rng), q = random_tensor({7, 3}, rng);
  CHECK(max_abs_diff(matmul(t.constant(p), t.constant(q)).value(), naive_matmul(p, q)) < 1e-12);
}

TEST_CASE("matmul mismatch names both shapes") {
  Tape t;
  auto a = t.constant(Tensor({2, 3}));
  auto b = t.constant(Tensor({4, 2}));
  try {
    matmul(a, b);
    FAIL("expected a shape error");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2x3]") != std::string::npos);
    CHECK(msg.find("[4x2]") != std::string::npos);
  }
}

TEST_CASE("softmax examples") {
  Tape t;
  auto u = softmax_lastdim(t.constant(Tensor::vector({0, 0, 0}))).value();
  for (double v : u.values()) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-15));

  auto w = softmax_lastdim(t.constant(Tensor::vector({0, std::log(2.0)}))).value();
  CHECK(std::abs(w[0] - 1.0 / 3) < 1e-15);
  CHECK(std::abs(w[1] - 2.0 / 3) < 1e-15);

  std::mt19937_64 rng(1);
  auto x = random_tensor({4, 6}, rng, -5, 5);
  auto base = softmax_lastdim(t.constant(x)).value();
  auto shifted = softmax_lastdim(affine(t.constant(x), 1.0, 123.0)).value();
  CHECK(max_abs_diff(base, shifted) < 1e-12);
  for (std::size_t i = 0; i < 4; ++i) {
    double s = 0;
    for (double v : base.row(i)) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      s += v;
    }
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
}

TEST_CASE("softmax of a large input stays finite") {
  Tape t;
  auto s = softmax_lastdim(t.constant(Tensor::vector({1000, 1001}))).value();
  CHECK(s.all_finite());
  CHECK(std::abs(s[0] + s[1] - 1.0) < 1e-12);
}

TEST_CASE("backward of sum of squares is 2x") {
  Tape t;
  auto x = t.leaf(Tensor::vector({1.5, -2, 0.25}));
  t.backward(sum(mul(x, x)));
  const Tensor g = t.grad_or_zeros(x);
  CHECK(g == Tensor::vector({3, -4, 0.5}));
}

TEST_CASE("cross-entropy gradient is softmax minus one-hot") {
  const std::vector<double> z = {0.3, -1.2, 2.0, 0.5};
  const std::size_t target = 1;
  Tape t;
  auto x = t.leaf(Tensor::vector(z));
  auto loss = scale(log(index(softmax_lastdim(x), target)), -1.0);
  t.backward(loss);
  const Tensor g = t.grad_or_zeros(x);
  double zmax = 2.0, denom = 0;
  for (double v : z) denom += std::exp(v - zmax);
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double expect = std::exp(z[i] - zmax) / denom - (i == target ? 1.0 : 0.0);
    CHECK(std::abs(g[i] - expect) < 1e-12);
  }
}

TEST_CASE("non-scalar backward is a contract error") {
  Tape t;
  auto x = t.leaf(Tensor::vector({1, 2}));
  CHECK_THROWS_AS(t.backward(x), ContractError);
}

TEST_CASE("operands on different tapes are rejected") {
  Tape a, b;
  CHECK_THROWS_AS(add(a.leaf(Tensor::vector({1})), b.leaf(Tensor::vector({1}))), ContractError);
}

TEST_CASE("finite differences per op") {
  std::mt19937_64 rng(42);
  auto r = [&](Shape s) { return random_tensor(std::move(s), rng); };
  auto pos = [&](Shape s) { return random_tensor(std::move(s), rng, 0.5, 2.0); };
  using V = std::vector<Var>;
  struct Case {
    const char* name;
    testing::Builder f;
    std::vector<Tensor> in;
  };
  const std::vector<Case> cases = {
      {"matmul", [](Tape&, const V& v) { return project(matmul(v[0], v[1]), 1); }, {r({3, 4}), r({4, 5})}},
      {"matmul_nt", [](Tape&, const V& v) { return project(matmul_nt(v[0], v[1]), 2); }, {r({3, 4}), r({6, 4})}},
      {"add", [](Tape&, const V& v) { return project(add(v[0], v[1]), 3); }, {r({2, 3}), r({2, 3})}},
      {"sub", [](Tape&, const V& v) { return project(sub(v[0], v[1]), 4); }, {r({2, 3}), r({2, 3})}},
      {"mul", [](Tape&, const V& v) { return project(mul(v[0], v[1]), 5); }, {r({2, 3}), r({2, 3})}},
      {"add_row_bias", [](Tape&, const V& v) { return project(add_row_bias(v[0], v[1]), 6); }, {r({3, 4}), r({4})}},
      {"scale", [](Tape&, const V& v) { return project(scale(v[0], -1.7), 7); }, {r({5})}},
      {"affine", [](Tape&, const V& v) { return project(affine(v[0], 0.3, 2.0), 8); }, {r({5})}},
      {"log", [](Tape&, const V& v) { return project(log(v[0]), 9); }, {pos({6})}},
      {"gelu", [](Tape&, const V& v) { return project(gelu(v[0]), 10); }, {r({2, 5})}},
      {"softmax", [](Tape&, const V& v) { return project(softmax_lastdim(v[0]), 11); }, {r({3, 5})}},
      {"softmax3", [](Tape&, const V& v) { return project(softmax_lastdim(v[0]), 12); }, {r({2, 3, 4})}},
      {"layer_norm", [](Tape&, const V& v) { return project(layer_norm(v[0], v[1], v[2]), 13); },
       {r({3, 6}), r({6}), r({6})}},
      {"slice_cols", [](Tape&, const V& v) { return project(slice_cols(v[0], 1, 3), 14); }, {r({3, 5})}},
      {"concat_cols", [](Tape&, const V& v) { return project(concat_cols(v), 15); }, {r({3, 2}), r({3, 4})}},
      {"slice_rows", [](Tape&, const V& v) { return project(slice_rows(v[0], 1, 2), 16); }, {r({4, 3})}},
      {"row", [](Tape&, const V& v) { return project(row(v[0], 2), 17); }, {r({4, 3})}},
      {"gather_rows", [](Tape&, const V& v) {
         const std::vector<int> ids = {2, 0, 2, 3};
         return project(gather_rows(v[0], ids), 18);
       }, {r({5, 3})}},
      {"stack", [](Tape&, const V& v) { return project(stack(v), 19); }, {r({3}), r({3}), r({3})}},
      {"sum", [](Tape&, const V& v) { return sum(mul(v[0], v[0])); }, {r({2, 2})}},
      {"add_n", [](Tape&, const V& v) { return project(add_n(v), 20); }, {r({4}), r({4}), r({4})}},
      {"mean_rows", [](Tape&, const V& v) { return project(mean_rows(v[0]), 21); }, {r({5, 3})}},
      {"dot", [](Tape&, const V& v) { return dot(v[0], v[1]); }, {r({7}), r({7})}},
      {"index", [](Tape&, const V& v) { return mul(index(v[0], 3), index(v[0], 1)); }, {r({5})}},
      {"logsumexp", [](Tape&, const V& v) { return logsumexp(v[0]); }, {r({6})}},
      {"weighted_rows", [](Tape&, const V& v) { return project(weighted_rows(v[0], v[1]), 22); },
       {r({4}), r({4, 3})}},
      {"normalize_sum", [](Tape&, const V& v) { return project(normalize_sum(v[0]), 23); }, {pos({5})}},
  };
  for (const auto& c : cases) {
    CAPTURE(c.name);
    CHECK(gradcheck(c.f, c.in) < 1e-4);
  }
}

TEST_CASE("detach blocks the gradient") {
  Tape t;
  auto x = t.leaf(Tensor::vector({1, 2}));
  t.backward(sum(mul(detach(x), x)));
  CHECK(t.grad_or_zeros(x) == Tensor::vector({1, 2}));
}

TEST_CASE("identical inputs give bit-identical outputs and gradients") {
  auto run = [] {
    std::mt19937_64 rng(9);
    Tape t;
    auto a = t.leaf(random_tensor({4, 4}, rng));
    auto b = t.leaf(random_tensor({4, 4}, rng));
    auto y = softmax_lastdim(matmul(gelu(a), b));
    auto loss = logsumexp(mean_rows(y));
    t.backward(loss);
    return std::make_pair(loss.value().item(), t.grad_or_zeros(a));
  };
  auto [l1, g1] = run();
  auto [l2, g2] = run();
  CHECK(l1 == l2);
  CHECK(g1 == g2);
}
