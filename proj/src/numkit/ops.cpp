#include "numkit/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "common/errors.hpp"

namespace mgh::num {
namespace {

void require_same_tape(Var a, Var b) {
  if (&a.tape() != &b.tape()) throw ContractError("operands live on different tapes");
}

void require_rank(Var x, std::size_t r, const char* op) {
  if (x.value().rank() != r) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(r) +
                     ", got " + shape_string(x.shape()));
  }
}

void require_same_shape(Var a, Var b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shapes " + shape_string(a.shape()) +
                     " and " + shape_string(b.shape()) + " differ");
  }
}

void axpy(Tensor* dst, const Tensor& src, double alpha = 1.0) {
  if (!dst) return;
  for (std::size_t i = 0; i < src.size(); ++i) (*dst)[i] += alpha * src[i];
}

}  // namespace

Var matmul(Var a, Var b) {
  require_same_tape(a, b);
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k) {
    throw ShapeError("matmul: inner dimensions differ for " + shape_string(a.shape()) +
                     " and " + shape_string(b.shape()));
  }
  Tensor out({m, n});
  gemm_nn(a.value().data(), b.value().data(), out.data(), m, k, n);
  return a.tape().record(std::move(out), {a, b}, [a, b, m, k, n](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.sink(a)) gemm_nt(g.data(), t.value(b).data(), ga->data(), m, n, k);
    if (Tensor* gb = t.sink(b)) gemm_tn(t.value(a).data(), g.data(), gb->data(), m, k, n);
  });
}

Var matmul_nt(Var a, Var b) {
  require_same_tape(a, b);
  require_rank(a, 2, "matmul_nt");
  require_rank(b, 2, "matmul_nt");
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[0];
  if (b.shape()[1] != k) {
    throw ShapeError("matmul_nt: inner dimensions differ for " + shape_string(a.shape()) +
                     " and " + shape_string(b.shape()));
  }
  Tensor out({m, n});
  gemm_nt(a.value().data(), b.value().data(), out.data(), m, k, n);
  return a.tape().record(std::move(out), {a, b}, [a, b, m, k, n](Tape& t, const Tensor& g) {
    // out = A·Bᵀ: dA = G·B, dB = Gᵀ·A
    if (Tensor* ga = t.sink(a)) gemm_nn(g.data(), t.value(b).data(), ga->data(), m, n, k);
    if (Tensor* gb = t.sink(b)) gemm_tn(g.data(), t.value(a).data(), gb->data(), m, n, k);
  });
}

Var add(Var a, Var b) {
  require_same_tape(a, b);
  require_same_shape(a, b, "add");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  return a.tape().record(std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g) {
    axpy(t.sink(a), g);
    axpy(t.sink(b), g);
  });
}

Var sub(Var a, Var b) {
  require_same_tape(a, b);
  require_same_shape(a, b, "sub");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  return a.tape().record(std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g) {
    axpy(t.sink(a), g);
    axpy(t.sink(b), g, -1.0);
  });
}

Var mul(Var a, Var b) {
  require_same_tape(a, b);
  require_same_shape(a, b, "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return a.tape().record(std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.sink(a)) {
      const Tensor& bv = t.value(b);
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * bv[i];
    }
    if (Tensor* gb = t.sink(b)) {
      const Tensor& av = t.value(a);
      for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] += g[i] * av[i];
    }
  });
}

Var add_row_bias(Var x, Var bias) {
  require_same_tape(x, bias);
  require_rank(x, 2, "add_row_bias");
  require_rank(bias, 1, "add_row_bias");
  const std::size_t m = x.shape()[0], n = x.shape()[1];
  if (bias.shape()[0] != n) {
    throw ShapeError("add_row_bias: bias " + shape_string(bias.shape()) +
                     " does not match " + shape_string(x.shape()));
  }
  Tensor out = x.value();
  const Tensor& b = bias.value();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out.at(i, j) += b[j];
  }
  return x.tape().record(std::move(out), {x, bias}, [x, bias, m, n](Tape& t, const Tensor& g) {
    axpy(t.sink(x), g);
    if (Tensor* gb = t.sink(bias)) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) (*gb)[j] += g.at(i, j);
      }
    }
  });
}

Var scale(Var x, double c) { return affine(x, c, 0.0); }

Var affine(Var x, double a, double b) {
  Tensor out = x.value();
  for (auto& v : out.data()) v = a * v + b;
  return x.tape().record(std::move(out), {x}, [x, a](Tape& t, const Tensor& g) {
    axpy(t.sink(x), g, a);
  });
}

Var log(Var x) {
  Tensor out = x.value();
  for (auto& v : out.data()) {
    if (!(v > 0.0)) throw DegenerateInputError("log of non-positive value");
    v = std::log(v);
  }
  return x.tape().record(std::move(out), {x}, [x](Tape& t, const Tensor& g) {
    if (Tensor* gx = t.sink(x)) {
      const Tensor& xv = t.value(x);
      for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i] / xv[i];
    }
  });
}

Var gelu(Var x) {
  Tensor out = x.value();
  for (auto& v : out.data()) v = 0.5 * v * (1.0 + std::erf(v * std::numbers::sqrt2 / 2.0));
  return x.tape().record(std::move(out), {x}, [x](Tape& t, const Tensor& g) {
    if (Tensor* gx = t.sink(x)) {
      const Tensor& xv = t.value(x);
      const double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double v = xv[i];
        const double cdf = 0.5 * (1.0 + std::erf(v * std::numbers::sqrt2 / 2.0));
        const double pdf = inv_sqrt_2pi * std::exp(-0.5 * v * v);
        (*gx)[i] += g[i] * (cdf + v * pdf);
      }
    }
  });
}

Var detach(Var x) { return x.tape().constant(x.value()); }

Var softmax_lastdim(Var x) {
  if (x.value().rank() == 0) throw ShapeError("softmax_lastdim: scalar input");
  const std::size_t n = x.shape().back();
  const std::size_t rows = x.value().size() / n;
  Tensor out = x.value();
  for (std::size_t r = 0; r < rows; ++r) {
    double* p = out.data().data() + r * n;
    const double mx = *std::max_element(p, p + n);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      p[j] = std::exp(p[j] - mx);
      s += p[j];
    }
    for (std::size_t j = 0; j < n; ++j) p[j] /= s;
  }
  return x.tape().record(std::move(out), {x}, [x, rows, n](Tape& t, const Tensor& g) {
    Tensor* gx = t.sink(x);
    if (!gx) return;
    // The rule recomputes the probabilities instead of holding a second copy.
    const Tensor& xv = t.value(x);
    std::vector<double> p(n);
    for (std::size_t r = 0; r < rows; ++r) {
      const double* xr = xv.data().data() + r * n;
      const double* gr = g.data().data() + r * n;
      double* dr = gx->data().data() + r * n;
      const double mx = *std::max_element(xr, xr + n);
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        p[j] = std::exp(xr[j] - mx);
        s += p[j];
      }
      double dotgp = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        p[j] /= s;
        dotgp += gr[j] * p[j];
      }
      for (std::size_t j = 0; j < n; ++j) dr[j] += p[j] * (gr[j] - dotgp);
    }
  });
}

Var layer_norm(Var x, Var gamma, Var beta, double eps) {
  require_same_tape(x, gamma);
  require_same_tape(x, beta);
  require_rank(x, 2, "layer_norm");
  const std::size_t m = x.shape()[0], n = x.shape()[1];
  if (gamma.shape() != Shape{n} || beta.shape() != Shape{n}) {
    throw ShapeError("layer_norm: affine parameters must have shape [" +
                     std::to_string(n) + "]");
  }
  const Tensor& xv = x.value();
  const Tensor& gv = gamma.value();
  const Tensor& bv = beta.value();
  Tensor xhat({m, n});
  std::vector<double> rstd(m);
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    double mu = 0.0;
    for (std::size_t j = 0; j < n; ++j) mu += xv.at(i, j);
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = xv.at(i, j) - mu;
      var += d * d;
    }
    var /= static_cast<double>(n);
    rstd[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < n; ++j) {
      xhat.at(i, j) = (xv.at(i, j) - mu) * rstd[i];
      out.at(i, j) = gv[j] * xhat.at(i, j) + bv[j];
    }
  }
  return x.tape().record(
      std::move(out), {x, gamma, beta},
      [x, gamma, beta, m, n, xhat = std::move(xhat), rstd = std::move(rstd)](
          Tape& t, const Tensor& g) {
        if (Tensor* gg = t.sink(gamma)) {
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) (*gg)[j] += g.at(i, j) * xhat.at(i, j);
        }
        if (Tensor* gb = t.sink(beta)) {
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) (*gb)[j] += g.at(i, j);
        }
        if (Tensor* gx = t.sink(x)) {
          const Tensor& gv = t.value(gamma);
          const double inv_n = 1.0 / static_cast<double>(n);
          for (std::size_t i = 0; i < m; ++i) {
            double mean_d = 0.0, mean_dx = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
              const double d = g.at(i, j) * gv[j];
              mean_d += d;
              mean_dx += d * xhat.at(i, j);
            }
            mean_d *= inv_n;
            mean_dx *= inv_n;
            for (std::size_t j = 0; j < n; ++j) {
              const double d = g.at(i, j) * gv[j];
              gx->at(i, j) += rstd[i] * (d - mean_d - xhat.at(i, j) * mean_dx);
            }
          }
        }
      });
}

Var slice_cols(Var x, std::size_t start, std::size_t count) {
  require_rank(x, 2, "slice_cols");
  const std::size_t m = x.shape()[0], n = x.shape()[1];
  if (count == 0 || start + count > n) {
    throw ShapeError("slice_cols: [" + std::to_string(start) + ", +" +
                     std::to_string(count) + ") outside " + shape_string(x.shape()));
  }
  Tensor out({m, count});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < count; ++j) out.at(i, j) = x.value().at(i, start + j);
  return x.tape().record(std::move(out), {x}, [x, m, start, count](Tape& t, const Tensor& g) {
    if (Tensor* gx = t.sink(x)) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < count; ++j) gx->at(i, start + j) += g.at(i, j);
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t m = parts[0].shape().at(0);
  std::size_t total = 0;
  for (const Var& p : parts) {
    require_same_tape(parts[0], p);
    require_rank(p, 2, "concat_cols");
    if (p.shape()[0] != m) throw ShapeError("concat_cols: row counts differ");
    total += p.shape()[1];
  }
  Tensor out({m, total});
  std::size_t off = 0;
  for (const Var& p : parts) {
    const std::size_t c = p.shape()[1];
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < c; ++j) out.at(i, off + j) = p.value().at(i, j);
    off += c;
  }
  std::vector<Var> ins(parts.begin(), parts.end());
  return parts[0].tape().record(std::move(out), parts, [ins, m](Tape& t, const Tensor& g) {
    std::size_t off = 0;
    for (const Var& p : ins) {
      const std::size_t c = t.value(p).shape()[1];
      if (Tensor* gp = t.sink(p)) {
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < c; ++j) gp->at(i, j) += g.at(i, off + j);
      }
      off += c;
    }
  });
}

Var slice_rows(Var x, std::size_t start, std::size_t count) {
  require_rank(x, 2, "slice_rows");
  const std::size_t m = x.shape()[0], n = x.shape()[1];
  if (count == 0 || start + count > m) {
    throw ShapeError("slice_rows: [" + std::to_string(start) + ", +" +
                     std::to_string(count) + ") outside " + shape_string(x.shape()));
  }
  const auto src = x.value().data().subspan(start * n, count * n);
  Tensor out({count, n}, std::vector<double>(src.begin(), src.end()));
  return x.tape().record(std::move(out), {x}, [x, start, n](Tape& t, const Tensor& g) {
    if (Tensor* gx = t.sink(x)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*gx)[start * n + i] += g[i];
    }
  });
}

Var row(Var x, std::size_t i) {
  require_rank(x, 2, "row");
  const std::size_t n = x.shape()[1];
  if (i >= x.shape()[0]) throw ShapeError("row index out of range");
  const auto r = x.value().row(i);
  Tensor out({n}, std::vector<double>(r.begin(), r.end()));
  return x.tape().record(std::move(out), {x}, [x, i, n](Tape& t, const Tensor& g) {
    if (Tensor* gx = t.sink(x)) {
      for (std::size_t j = 0; j < n; ++j) (*gx)[i * n + j] += g[j];
    }
  });
}

Var gather_rows(Var table, std::span<const int> ids) {
  require_rank(table, 2, "gather_rows");
  const std::size_t v = table.shape()[0], n = table.shape()[1];
  if (ids.empty()) throw ShapeError("gather_rows: empty index list");
  Tensor out({ids.size(), n});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= v) {
      throw ShapeError("gather_rows: id " + std::to_string(ids[i]) + " outside table of " +
                       std::to_string(v) + " rows");
    }
    const auto r = table.value().row(static_cast<std::size_t>(ids[i]));
    std::copy(r.begin(), r.end(), out.row(i).begin());
  }
  std::vector<int> idx(ids.begin(), ids.end());
  return table.tape().record(std::move(out), {table}, [table, idx, n](Tape& t, const Tensor& g) {
    if (Tensor* gt = t.sink(table)) {
      for (std::size_t i = 0; i < idx.size(); ++i) {
        auto dst = gt->row(static_cast<std::size_t>(idx[i]));
        for (std::size_t j = 0; j < n; ++j) dst[j] += g.at(i, j);
      }
    }
  });
}

Var stack(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("stack: no inputs");
  const Shape inner = parts[0].shape();
  const std::size_t each = shape_size(inner);
  Shape shape{parts.size()};
  shape.insert(shape.end(), inner.begin(), inner.end());
  std::vector<double> data;
  data.reserve(each * parts.size());
  for (const Var& p : parts) {
    require_same_tape(parts[0], p);
    if (p.shape() != inner) throw ShapeError("stack: operand shapes differ");
    data.insert(data.end(), p.value().data().begin(), p.value().data().end());
  }
  std::vector<Var> ins(parts.begin(), parts.end());
  return parts[0].tape().record(Tensor(std::move(shape), std::move(data)), parts,
                                [ins, each](Tape& t, const Tensor& g) {
                                  for (std::size_t p = 0; p < ins.size(); ++p) {
                                    if (Tensor* gp = t.sink(ins[p])) {
                                      for (std::size_t i = 0; i < each; ++i)
                                        (*gp)[i] += g[p * each + i];
                                    }
                                  }
                                });
}

Var sum(Var x) {
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  return x.tape().record(Tensor::scalar(s), {x}, [x](Tape& t, const Tensor& g) {
    if (Tensor* gx = t.sink(x)) {
      for (auto& v : gx->data()) v += g[0];
    }
  });
}

Var add_n(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("add_n: no inputs");
  Tensor out = parts[0].value();
  for (std::size_t p = 1; p < parts.size(); ++p) {
    require_same_tape(parts[0], parts[p]);
    if (parts[p].shape() != out.shape()) throw ShapeError("add_n: operand shapes differ");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += parts[p].value()[i];
  }
  std::vector<Var> ins(parts.begin(), parts.end());
  return parts[0].tape().record(std::move(out), parts, [ins](Tape& t, const Tensor& g) {
    for (const Var& p : ins) axpy(t.sink(p), g);
  });
}

Var mean_rows(Var x) {
  require_rank(x, 2, "mean_rows");
  const std::size_t m = x.shape()[0], n = x.shape()[1];
  Tensor out({n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j] += x.value().at(i, j);
  const double inv = 1.0 / static_cast<double>(m);
  for (auto& v : out.data()) v *= inv;
  return x.tape().record(std::move(out), {x}, [x, m, n, inv](Tape& t, const Tensor& g) {
    if (Tensor* gx = t.sink(x)) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) gx->at(i, j) += g[j] * inv;
    }
  });
}

Var dot(Var a, Var b) {
  require_same_tape(a, b);
  require_same_shape(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.value().size(); ++i) s += a.value()[i] * b.value()[i];
  return a.tape().record(Tensor::scalar(s), {a, b}, [a, b](Tape& t, const Tensor& g) {
    axpy(t.sink(a), t.value(b), g[0]);
    axpy(t.sink(b), t.value(a), g[0]);
  });
}

Var index(Var x, std::size_t i) {
  if (i >= x.value().size()) throw ShapeError("index out of range");
  return x.tape().record(Tensor::scalar(x.value()[i]), {x}, [x, i](Tape& t, const Tensor& g) {
    if (Tensor* gx = t.sink(x)) (*gx)[i] += g[0];
  });
}

Var logsumexp(Var x) {
  require_rank(x, 1, "logsumexp");
  const auto& v = x.value();
  const double mx = *std::max_element(v.data().begin(), v.data().end());
  double s = 0.0;
  for (double e : v.data()) s += std::exp(e - mx);
  const double out = mx + std::log(s);
  return x.tape().record(Tensor::scalar(out), {x}, [x, out](Tape& t, const Tensor& g) {
    if (Tensor* gx = t.sink(x)) {
      const Tensor& xv = t.value(x);
      for (std::size_t i = 0; i < xv.size(); ++i) (*gx)[i] += g[0] * std::exp(xv[i] - out);
    }
  });
}

Var weighted_rows(Var w, Var x) {
  require_same_tape(w, x);
  require_rank(w, 1, "weighted_rows");
  require_rank(x, 2, "weighted_rows");
  const std::size_t k = x.shape()[0], n = x.shape()[1];
  if (w.shape()[0] != k) {
    throw ShapeError("weighted_rows: " + shape_string(w.shape()) + " weights for " +
                     shape_string(x.shape()));
  }
  Tensor out({n});
  for (std::size_t i = 0; i < k; ++i) {
    const double wi = w.value()[i];
    for (std::size_t j = 0; j < n; ++j) out[j] += wi * x.value().at(i, j);
  }
  return w.tape().record(std::move(out), {w, x}, [w, x, k, n](Tape& t, const Tensor& g) {
    if (Tensor* gw = t.sink(w)) {
      const Tensor& xv = t.value(x);
      for (std::size_t i = 0; i < k; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += g[j] * xv.at(i, j);
        (*gw)[i] += s;
      }
    }
    if (Tensor* gx = t.sink(x)) {
      const Tensor& wv = t.value(w);
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < n; ++j) gx->at(i, j) += wv[i] * g[j];
    }
  });
}

Var normalize_sum(Var w) {
  require_rank(w, 1, "normalize_sum");
  double s = 0.0;
  for (double v : w.value().data()) {
    if (v < 0.0) throw DegenerateInputError("normalize_sum: negative weight");
    s += v;
  }
  if (!(s > 0.0)) throw DegenerateInputError("normalize_sum: weights sum to zero");
  Tensor out = w.value();
  for (auto& v : out.data()) v /= s;
  return w.tape().record(std::move(out), {w}, [w, s](Tape& t, const Tensor& g) {
    if (Tensor* gw = t.sink(w)) {
      const Tensor& wv = t.value(w);
      double dotgw = 0.0;
      for (std::size_t i = 0; i < wv.size(); ++i) dotgw += g[i] * wv[i] / s;
      for (std::size_t i = 0; i < wv.size(); ++i) (*gw)[i] += (g[i] - dotgw) / s;
    }
  });
}

}  // namespace mgh::num
