#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "numkit/tape.hpp"

// Differentiable primitives. Every op records itself on the tape of its
// first operand; operands must share that tape.
namespace mgh::num {

Var matmul(Var a, Var b);     // [m×k]·[k×n]
Var matmul_nt(Var a, Var b);  // [m×k]·[n×k]ᵀ

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var add_row_bias(Var x, Var bias);  // [m×n] + [n] broadcast over rows
Var scale(Var x, double c);
Var affine(Var x, double a, double b);  // a·x + b
Var log(Var x);
Var gelu(Var x);  // exact erf form
Var detach(Var x);

Var softmax_lastdim(Var x);
Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);

Var slice_cols(Var x, std::size_t start, std::size_t count);
Var concat_cols(std::span<const Var> parts);
Var slice_rows(Var x, std::size_t start, std::size_t count);
Var row(Var x, std::size_t i);
Var gather_rows(Var table, std::span<const int> ids);
Var stack(std::span<const Var> parts);  // new leading axis

Var sum(Var x);        // -> scalar
Var add_n(std::span<const Var> parts);
Var mean_rows(Var x);  // [m×n] -> [n]
Var dot(Var a, Var b);  // -> scalar
Var index(Var x, std::size_t i);  // -> scalar
Var logsumexp(Var x);  // [n] -> scalar

// Σ_i w[i]·x[i] for w[K], x[K×n] -> [n]
Var weighted_rows(Var w, Var x);
// w / Σ w for a non-negative vector with positive sum
Var normalize_sum(Var w);

}  // namespace mgh::num
