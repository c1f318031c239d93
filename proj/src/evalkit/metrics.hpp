#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mgh::eval {

// 1-based rank of corpus[gold] when sorted by descending score; ties go to
// the lower corpus index.
std::size_t gold_rank(std::span<const double> scores, std::size_t gold);

// Fraction of queries whose gold rank is ≤ k.
double recall_at_k(std::span<const std::size_t> ranks, std::size_t k);
// Binary single-gold nDCG: 1/log2(rank + 1) inside the top k, else 0.
double ndcg_at_k(std::span<const std::size_t> ranks, std::size_t k);

// 1-based ranks, ties share the average rank.
std::vector<double> average_ranks(std::span<const double> x);
double pearson(std::span<const double> x, std::span<const double> y);
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace mgh::eval
