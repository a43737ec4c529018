// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#include "xlb/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace xlb::num {
namespace {

template <typename T>
void require_same_shape(const char* op, const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shapes " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()) + " differ");
  }
}

template <typename T>
void require_rank(const char* op, const Tensor<T>& a, std::size_t rank) {
  if (a.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         shape_str(a.shape()));
  }
}

/// Trailing dimension and number of leading rows.
template <typename T>
std::pair<std::size_t, std::size_t> rows_cols(const Tensor<T>& x) {
  const std::size_t d = x.shape().back();
  return {d ? x.size() / d : 0, d};
}

/// C[m x n] += A[m x k] * B[k x n]. Each C element accumulates in ascending k
/// order regardless of m, so a row's result does not depend on how many other
/// rows share the call.
template <typename T>
void gemm_acc(std::size_t m, std::size_t k, std::size_t n, const T* a, const T* b, T* c) {
  for (std::size_t i = 0; i < m; ++i) {
    T* crow = c + i * n;
    const T* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = arow[p];
      const T* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <typename T>
std::vector<T> transpose(const T* a, std::size_t rows, std::size_t cols) {
  std::vector<T> t(rows * cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) t[j * rows + i] = a[i * cols + j];
  return t;
}

/// dA += G[m x n] * B[k x n]^T
template <typename T>
void grad_lhs(std::size_t m, std::size_t k, std::size_t n, const T* g, const T* b, T* da) {
  const std::vector<T> bt = transpose(b, k, n);
  gemm_acc(m, n, k, g, bt.data(), da);
}

/// dB += A[m x k]^T * G[m x n]
template <typename T>
void grad_rhs(std::size_t m, std::size_t k, std::size_t n, const T* a, const T* g, T* db) {
  for (std::size_t i = 0; i < m; ++i) {
    const T* grow = g + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = a[i * k + p];
      T* drow = db + p * n;
      for (std::size_t j = 0; j < n; ++j) drow[j] += av * grow[j];
    }
  }
}

template <typename T>
Tensor<T> new_output(Tape<T>& tape, Shape shape, bool track) {
  Tensor<T> out(std::move(shape));
  if (track && tape.enabled()) out.set_requires_grad(true);
  return out;
}

template <typename T, typename F, typename G>
Tensor<T> unary(Tape<T>& tape, const Tensor<T>& x, F fwd, G dfdx) {
  const bool track = tape.tracks(x);
  Tensor<T> out = new_output(tape, x.shape(), track);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = fwd(x[i]);
  if (track) {
    tape.record(out, [x, out, dfdx]() mutable {
      auto gx = x.ensure_grad();
      auto go = out.grad();
      for (std::size_t i = 0; i < x.size(); ++i) gx[i] += go[i] * dfdx(x[i], out[i]);
    });
  }
  return out;
}

}  // namespace

template <typename T>
Tensor<T> matmul(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b) {
  require_rank("matmul", a, 2);
  require_rank("matmul", b, 2);
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw DimensionError("matmul: inner dimensions of " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()) + " disagree");
  }
  const bool track = tape.tracks(a) || tape.tracks(b);
  Tensor<T> out = new_output(tape, {m, n}, track);
  gemm_acc(m, k, n, a.data(), b.data(), out.data());
  if (track) {
    tape.record(out, [a, b, out, m, k, n]() mutable {
      if (a.requires_grad()) grad_lhs(m, k, n, out.grad().data(), b.data(), a.ensure_grad().data());
      if (b.requires_grad()) grad_rhs(m, k, n, a.data(), out.grad().data(), b.ensure_grad().data());
    });
  }
  return out;
}

template <typename T>
Tensor<T> affine(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias) {
  require_rank("affine", w, 2);
  const auto [m, k] = rows_cols(x);
  const std::size_t n = w.dim(1);
  if (w.dim(0) != k) {
    throw DimensionError("affine: input " + shape_str(x.shape()) + " vs weight " +
                         shape_str(w.shape()));
  }
  const bool has_bias = bias.defined();
  if (has_bias && (bias.rank() != 1 || bias.dim(0) != n)) {
    throw DimensionError("affine: bias " + shape_str(bias.shape()) + " vs weight " +
                         shape_str(w.shape()));
  }
  const bool track = tape.tracks(x) || tape.tracks(w) || (has_bias && tape.tracks(bias));
  Shape shape = x.shape();
  shape.back() = n;
  Tensor<T> out = new_output(tape, shape, track);
  T* o = out.data();
  if (has_bias)
    for (std::size_t i = 0; i < m; ++i) std::copy(bias.data(), bias.data() + n, o + i * n);
  gemm_acc(m, k, n, x.data(), w.data(), o);
  if (track) {
    tape.record(out, [x, w, bias, out, m, k, n, has_bias]() mutable {
      const T* g = out.grad().data();
      if (x.requires_grad()) grad_lhs(m, k, n, g, w.data(), x.ensure_grad().data());
      if (w.requires_grad()) grad_rhs(m, k, n, x.data(), g, w.ensure_grad().data());
      if (has_bias && bias.requires_grad()) {
        auto gb = bias.ensure_grad();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j) gb[j] += g[i * n + j];
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> matvec(Tape<T>& tape, const Tensor<T>& z, const Tensor<T>& a) {
  require_rank("matvec", z, 2);
  require_rank("matvec", a, 1);
  const std::size_t l = z.dim(0), d = z.dim(1);
  if (a.dim(0) != d) {
    throw DimensionError("matvec: " + shape_str(z.shape()) + " vs " + shape_str(a.shape()));
  }
  const bool track = tape.tracks(z) || tape.tracks(a);
  Tensor<T> out = new_output(tape, {l}, track);
  for (std::size_t i = 0; i < l; ++i) {
    T s{0};
    for (std::size_t j = 0; j < d; ++j) s += z[i * d + j] * a[j];
    out[i] = s;
  }
  if (track) {
    tape.record(out, [z, a, out, l, d]() mutable {
      auto g = out.grad();
      if (z.requires_grad()) {
        auto gz = z.ensure_grad();
        for (std::size_t i = 0; i < l; ++i)
          for (std::size_t j = 0; j < d; ++j) gz[i * d + j] += g[i] * a[j];
      }
      if (a.requires_grad()) {
        auto ga = a.ensure_grad();
        for (std::size_t i = 0; i < l; ++i)
          for (std::size_t j = 0; j < d; ++j) ga[j] += g[i] * z[i * d + j];
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> add(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape("add", a, b);
  const bool track = tape.tracks(a) || tape.tracks(b);
  Tensor<T> out = new_output(tape, a.shape(), track);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  if (track) {
    tape.record(out, [a, b, out]() mutable {
      auto g = out.grad();
      if (a.requires_grad()) {
        auto ga = a.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (b.requires_grad()) {
        auto gb = b.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> sub(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape("sub", a, b);
  const bool track = tape.tracks(a) || tape.tracks(b);
  Tensor<T> out = new_output(tape, a.shape(), track);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  if (track) {
    tape.record(out, [a, b, out]() mutable {
      auto g = out.grad();
      if (a.requires_grad()) {
        auto ga = a.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (b.requires_grad()) {
        auto gb = b.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> mul(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape("mul", a, b);
  const bool track = tape.tracks(a) || tape.tracks(b);
  Tensor<T> out = new_output(tape, a.shape(), track);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  if (track) {
    tape.record(out, [a, b, out]() mutable {
      auto g = out.grad();
      if (a.requires_grad()) {
        auto ga = a.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * b[i];
      }
      if (b.requires_grad()) {
        auto gb = b.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * a[i];
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> scale(Tape<T>& tape, const Tensor<T>& a, T factor) {
  return unary(
      tape, a, [factor](T v) { return v * factor; }, [factor](T, T) { return factor; });
}

template <typename T>
Tensor<T> add_bias(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& bias) {
  const auto [m, n] = rows_cols(x);
  if (bias.rank() != 1 || bias.dim(0) != n) {
    throw DimensionError("add_bias: " + shape_str(x.shape()) + " vs " + shape_str(bias.shape()));
  }
  const bool track = tape.tracks(x) || tape.tracks(bias);
  Tensor<T> out = new_output(tape, x.shape(), track);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = x[i * n + j] + bias[j];
  if (track) {
    tape.record(out, [x, bias, out, m, n]() mutable {
      auto g = out.grad();
      if (x.requires_grad()) {
        auto gx = x.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
      }
      if (bias.requires_grad()) {
        auto gb = bias.ensure_grad();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j) gb[j] += g[i * n + j];
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> relu(Tape<T>& tape, const Tensor<T>& x) {
  return unary(
      tape, x, [](T v) { return v > T{0} ? v : T{0}; },
      [](T v, T) { return v > T{0} ? T{1} : T{0}; });
}

template <typename T>
Tensor<T> gelu(Tape<T>& tape, const Tensor<T>& x) {
  constexpr T inv_sqrt2 = static_cast<T>(0.70710678118654752440);
  constexpr T inv_sqrt2pi = static_cast<T>(0.39894228040143267794);
  return unary(
      tape, x, [](T v) { return T{0.5} * v * (T{1} + std::erf(v * inv_sqrt2)); },
      [](T v, T) {
        const T cdf = T{0.5} * (T{1} + std::erf(v * inv_sqrt2));
        return cdf + v * inv_sqrt2pi * std::exp(T{-0.5} * v * v);
      });
}

template <typename T>
Tensor<T> elu(Tape<T>& tape, const Tensor<T>& x, T alpha) {
  return unary(
      tape, x, [alpha](T v) { return v > T{0} ? v : alpha * (std::exp(v) - T{1}); },
      [alpha](T v, T y) { return v > T{0} ? T{1} : y + alpha; });
}

template <typename T>
Tensor<T> leaky_relu(Tape<T>& tape, const Tensor<T>& x, T slope) {
  return unary(
      tape, x, [slope](T v) { return v > T{0} ? v : slope * v; },
      [slope](T v, T) { return v > T{0} ? T{1} : slope; });
}

template <typename T>
Tensor<T> softmax(Tape<T>& tape, const Tensor<T>& x) {
  const auto [m, n] = rows_cols(x);
  if (n == 0) throw ContractError("softmax over an empty axis");
  const bool track = tape.tracks(x);
  Tensor<T> out = new_output(tape, x.shape(), track);
  for (std::size_t i = 0; i < m; ++i) {
    const T* xr = x.data() + i * n;
    T* yr = out.data() + i * n;
    T mx = xr[0];
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(xr[j])) throw NumericError("softmax: non-finite input");
      mx = std::max(mx, xr[j]);
    }
    T z{0};
    for (std::size_t j = 0; j < n; ++j) z += (yr[j] = std::exp(xr[j] - mx));
    for (std::size_t j = 0; j < n; ++j) yr[j] /= z;
  }
  if (track) {
    tape.record(out, [x, out, m, n]() mutable {
      auto gx = x.ensure_grad();
      auto g = out.grad();
      for (std::size_t i = 0; i < m; ++i) {
        T dot{0};
        for (std::size_t j = 0; j < n; ++j) dot += g[i * n + j] * out[i * n + j];
        for (std::size_t j = 0; j < n; ++j) gx[i * n + j] += out[i * n + j] * (g[i * n + j] - dot);
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> layer_norm(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& gain,
                     const Tensor<T>& bias, T eps) {
  const auto [m, n] = rows_cols(x);
  if (gain.size() != n || bias.size() != n) {
    throw DimensionError("layer_norm: " + shape_str(x.shape()) + " with gain " +
                         shape_str(gain.shape()) + " and bias " + shape_str(bias.shape()));
  }
  if (!(eps > T{0})) throw ContractError("layer_norm: eps must be positive");
  const bool track = tape.tracks(x) || tape.tracks(gain) || tape.tracks(bias);
  Tensor<T> out = new_output(tape, x.shape(), track);
  std::vector<T> xhat(x.size());
  std::vector<T> inv(m);
  for (std::size_t i = 0; i < m; ++i) {
    const T* xr = x.data() + i * n;
    T mu{0};
    for (std::size_t j = 0; j < n; ++j) mu += xr[j];
    mu /= static_cast<T>(n);
    T var{0};
    for (std::size_t j = 0; j < n; ++j) var += (xr[j] - mu) * (xr[j] - mu);
    var /= static_cast<T>(n);
    inv[i] = T{1} / std::sqrt(var + eps);
    for (std::size_t j = 0; j < n; ++j) {
      xhat[i * n + j] = (xr[j] - mu) * inv[i];
      out[i * n + j] = gain[j] * xhat[i * n + j] + bias[j];
    }
  }
  if (track) {
    tape.record(out, [x, gain, bias, out, xhat = std::move(xhat), inv = std::move(inv), m,
                      n]() mutable {
      auto g = out.grad();
      if (gain.requires_grad()) {
        auto gg = gain.ensure_grad();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j) gg[j] += g[i * n + j] * xhat[i * n + j];
      }
      if (bias.requires_grad()) {
        auto gb = bias.ensure_grad();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j) gb[j] += g[i * n + j];
      }
      if (x.requires_grad()) {
        auto gx = x.ensure_grad();
        std::vector<T> dxhat(n);
        for (std::size_t i = 0; i < m; ++i) {
          T mean_d{0}, mean_dx{0};
          for (std::size_t j = 0; j < n; ++j) {
            dxhat[j] = g[i * n + j] * gain[j];
            mean_d += dxhat[j];
            mean_dx += dxhat[j] * xhat[i * n + j];
          }
          mean_d /= static_cast<T>(n);
          mean_dx /= static_cast<T>(n);
          for (std::size_t j = 0; j < n; ++j)
            gx[i * n + j] += inv[i] * (dxhat[j] - mean_d - xhat[i * n + j] * mean_dx);
        }
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> sum(Tape<T>& tape, const Tensor<T>& x) {
  const bool track = tape.tracks(x);
  Tensor<T> out = new_output(tape, {1}, track);
  T s{0};
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i];
  out[0] = s;
  if (track) {
    tape.record(out, [x, out]() mutable {
      auto gx = x.ensure_grad();
      const T g = out.grad()[0];
      for (auto& v : gx) v += g;
    });
  }
  return out;
}

template <typename T>
Tensor<T> mean(Tape<T>& tape, const Tensor<T>& x) {
  if (x.size() == 0) throw ContractError("mean of an empty tensor");
  return scale(tape, sum(tape, x), T{1} / static_cast<T>(x.size()));
}

template <typename T>
Tensor<T> embedding(Tape<T>& tape, const Tensor<T>& table, std::span<const std::int32_t> ids) {
  require_rank("embedding", table, 2);
  const std::size_t v = table.dim(0), d = table.dim(1);
  for (auto id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= v) {
      throw IndexError("embedding: id " + std::to_string(id) + " outside vocabulary of " +
                       std::to_string(v));
    }
  }
  const bool track = tape.tracks(table);
  Tensor<T> out = new_output(tape, {ids.size(), d}, track);
  for (std::size_t i = 0; i < ids.size(); ++i)
    std::copy_n(table.data() + static_cast<std::size_t>(ids[i]) * d, d, out.data() + i * d);
  if (track) {
    std::vector<std::int32_t> idv(ids.begin(), ids.end());
    tape.record(out, [table, out, idv = std::move(idv), d]() mutable {
      auto gt = table.ensure_grad();
      auto g = out.grad();
      for (std::size_t i = 0; i < idv.size(); ++i)
        for (std::size_t j = 0; j < d; ++j)
          gt[static_cast<std::size_t>(idv[i]) * d + j] += g[i * d + j];
    });
  }
  return out;
}

template <typename T>
Tensor<T> gather_rows(Tape<T>& tape, const Tensor<T>& x, std::span<const std::size_t> index) {
  const auto [m, d] = rows_cols(x);
  for (auto r : index)
    if (r >= m) throw IndexError("gather_rows: row " + std::to_string(r) + " of " + std::to_string(m));
  const bool track = tape.tracks(x);
  Tensor<T> out = new_output(tape, {index.size(), d}, track);
  for (std::size_t i = 0; i < index.size(); ++i)
    std::copy_n(x.data() + index[i] * d, d, out.data() + i * d);
  if (track) {
    std::vector<std::size_t> idx(index.begin(), index.end());
    tape.record(out, [x, out, idx = std::move(idx), d]() mutable {
      auto gx = x.ensure_grad();
      auto g = out.grad();
      for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < d; ++j) gx[idx[i] * d + j] += g[i * d + j];
    });
  }
  return out;
}

template <typename T>
Tensor<T> masked_lerp(Tape<T>& tape, const Tensor<T>& base, const Tensor<T>& other, T alpha,
                      std::span<const std::uint8_t> row_mask) {
  require_same_shape("masked_lerp", base, other);
  const auto [m, d] = rows_cols(base);
  if (row_mask.size() != m) throw DimensionError("masked_lerp: mask length differs from row count");
  if (!(alpha >= T{0} && alpha <= T{1})) throw ContractError("masked_lerp: alpha outside [0,1]");
  const bool track = tape.tracks(base) || tape.tracks(other);
  Tensor<T> out = new_output(tape, base.shape(), track);
  const T beta = T{1} - alpha;
  for (std::size_t r = 0; r < m; ++r) {
    const T* b = base.data() + r * d;
    const T* o = other.data() + r * d;
    T* y = out.data() + r * d;
    if (!row_mask[r] || alpha == T{0}) {
      std::copy_n(b, d, y);
    } else if (alpha == T{1}) {
      std::copy_n(o, d, y);
    } else {
      for (std::size_t j = 0; j < d; ++j) y[j] = alpha * o[j] + beta * b[j];
    }
  }
  if (track) {
    std::vector<std::uint8_t> mask(row_mask.begin(), row_mask.end());
    tape.record(out, [base, other, out, mask = std::move(mask), alpha, beta, d]() mutable {
      auto g = out.grad();
      if (base.requires_grad()) {
        auto gb = base.ensure_grad();
        for (std::size_t r = 0; r < mask.size(); ++r) {
          const T w = mask[r] ? beta : T{1};
          for (std::size_t j = 0; j < d; ++j) gb[r * d + j] += w * g[r * d + j];
        }
      }
      if (other.requires_grad()) {
        auto go = other.ensure_grad();
        for (std::size_t r = 0; r < mask.size(); ++r) {
          if (!mask[r]) continue;
          for (std::size_t j = 0; j < d; ++j) go[r * d + j] += alpha * g[r * d + j];
        }
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> dropout(Tape<T>& tape, const Tensor<T>& x, T p, Rng& rng) {
  if (p <= T{0}) return x;
  if (p >= T{1}) throw ContractError("dropout probability must be < 1");
  std::vector<T> keep(x.size());
  const T s = T{1} / (T{1} - p);
  for (auto& k : keep) k = uniform01(rng) >= static_cast<double>(p) ? s : T{0};
  const bool track = tape.tracks(x);
  Tensor<T> out = new_output(tape, x.shape(), track);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * keep[i];
  if (track) {
    tape.record(out, [x, out, keep = std::move(keep)]() mutable {
      auto gx = x.ensure_grad();
      auto g = out.grad();
      for (std::size_t i = 0; i < keep.size(); ++i) gx[i] += g[i] * keep[i];
    });
  }
  return out;
}

template <typename T>
Tensor<T> attention(Tape<T>& tape, const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                    const SeqLayout& layout, std::size_t heads, std::vector<T>* probs_out) {
  require_same_shape("attention", q, k);
  require_same_shape("attention", q, v);
  const auto [rows, d] = rows_cols(q);
  const std::size_t bsz = layout.batch, s = layout.seq_len;
  if (rows != bsz * s || layout.lengths.size() != bsz) {
    throw DimensionError("attention: " + shape_str(q.shape()) + " does not match layout " +
                         std::to_string(bsz) + "x" + std::to_string(s));
  }
  if (heads == 0 || d % heads != 0) throw ContractError("attention: width not divisible by heads");
  for (auto len : layout.lengths)
    if (len == 0 || len > s) throw ContractError("attention: every sequence needs 1..S valid keys");
  const std::size_t dh = d / heads;
  const T sc = T{1} / std::sqrt(static_cast<T>(dh));
  const bool track = tape.tracks(q) || tape.tracks(k) || tape.tracks(v);
  Tensor<T> out = new_output(tape, q.shape(), track);
  std::vector<T> probs(bsz * heads * s * s, T{0});

  for (std::size_t b = 0; b < bsz; ++b) {
    const std::size_t len = layout.lengths[b];
    for (std::size_t h = 0; h < heads; ++h) {
      T* pbh = probs.data() + (b * heads + h) * s * s;
      for (std::size_t i = 0; i < s; ++i) {
        const T* qi = q.data() + (b * s + i) * d + h * dh;
        T* pi = pbh + i * s;
        T mx = -std::numeric_limits<T>::infinity();
        for (std::size_t j = 0; j < len; ++j) {
          const T* kj = k.data() + (b * s + j) * d + h * dh;
          T dot{0};
          for (std::size_t c = 0; c < dh; ++c) dot += qi[c] * kj[c];
          pi[j] = dot * sc;
          mx = std::max(mx, pi[j]);
        }
        if (!std::isfinite(mx)) throw NumericError("attention: non-finite logits");
        T z{0};
        for (std::size_t j = 0; j < len; ++j) z += (pi[j] = std::exp(pi[j] - mx));
        for (std::size_t j = 0; j < len; ++j) pi[j] /= z;
        T* oi = out.data() + (b * s + i) * d + h * dh;
        for (std::size_t j = 0; j < len; ++j) {
          const T* vj = v.data() + (b * s + j) * d + h * dh;
          for (std::size_t c = 0; c < dh; ++c) oi[c] += pi[j] * vj[c];
        }
      }
    }
  }
  if (probs_out) *probs_out = probs;
  if (track) {
    tape.record(out, [q, k, v, out, probs = std::move(probs), layout, heads, d, dh, sc]() mutable {
      const std::size_t bsz = layout.batch, s = layout.seq_len;
      auto g = out.grad();
      T* gq = q.requires_grad() ? q.ensure_grad().data() : nullptr;
      T* gk = k.requires_grad() ? k.ensure_grad().data() : nullptr;
      T* gv = v.requires_grad() ? v.ensure_grad().data() : nullptr;
      std::vector<T> dp(s);
      for (std::size_t b = 0; b < bsz; ++b) {
        const std::size_t len = layout.lengths[b];
        for (std::size_t h = 0; h < heads; ++h) {
          const T* pbh = probs.data() + (b * heads + h) * s * s;
          for (std::size_t i = 0; i < s; ++i) {
            const T* pi = pbh + i * s;
            const T* gi = g.data() + (b * s + i) * d + h * dh;
            T dot{0};
            for (std::size_t j = 0; j < len; ++j) {
              const std::size_t rj = (b * s + j) * d + h * dh;
              T acc{0};
              for (std::size_t c = 0; c < dh; ++c) acc += gi[c] * v[rj + c];
              dp[j] = acc;
              dot += acc * pi[j];
              if (gv)
                for (std::size_t c = 0; c < dh; ++c) gv[rj + c] += pi[j] * gi[c];
            }
            const std::size_t ri = (b * s + i) * d + h * dh;
            for (std::size_t j = 0; j < len; ++j) {
              const T dl = pi[j] * (dp[j] - dot) * sc;
              const std::size_t rj = (b * s + j) * d + h * dh;
              if (gq)
                for (std::size_t c = 0; c < dh; ++c) gq[ri + c] += dl * k[rj + c];
              if (gk)
                for (std::size_t c = 0; c < dh; ++c) gk[rj + c] += dl * q[ri + c];
            }
          }
        }
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> spmm(Tape<T>& tape, const Csr& adj, const Tensor<T>& x) {
  const auto [m, d] = rows_cols(x);
  if (adj.rows != m || adj.offsets.size() != m + 1 || adj.weights.size() != adj.cols.size()) {
    throw DimensionError("spmm: operator with " + std::to_string(adj.rows) + " rows vs input " +
                         shape_str(x.shape()));
  }
  const bool track = tape.tracks(x);
  Tensor<T> out = new_output(tape, x.shape(), track);
  for (std::size_t i = 0; i < m; ++i) {
    T* y = out.data() + i * d;
    for (std::size_t e = adj.offsets[i]; e < adj.offsets[i + 1]; ++e) {
      const T w = static_cast<T>(adj.weights[e]);
      const T* xs = x.data() + adj.cols[e] * d;
      for (std::size_t j = 0; j < d; ++j) y[j] += w * xs[j];
    }
  }
  if (track) {
    tape.record(out, [x, out, m, d, csr = adj]() mutable {
      auto gx = x.ensure_grad();
      auto g = out.grad();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t e = csr.offsets[i]; e < csr.offsets[i + 1]; ++e) {
          const T w = static_cast<T>(csr.weights[e]);
          for (std::size_t j = 0; j < d; ++j) gx[csr.cols[e] * d + j] += w * g[i * d + j];
        }
    });
  }
  return out;
}

template <typename T>
Tensor<T> gat_aggregate(Tape<T>& tape, const Tensor<T>& z, const Tensor<T>& center,
                        const Tensor<T>& neighbor, const Csr& nbrs, T slope,
                        std::vector<T>* coeffs_out) {
  require_rank("gat_aggregate", z, 2);
  const std::size_t l = z.dim(0), d = z.dim(1);
  if (center.size() != l || neighbor.size() != l || nbrs.rows != l ||
      nbrs.offsets.size() != l + 1) {
    throw DimensionError("gat_aggregate: node count mismatch for " + shape_str(z.shape()));
  }
  const bool track = tape.tracks(z) || tape.tracks(center) || tape.tracks(neighbor);
  Tensor<T> out = new_output(tape, z.shape(), track);
  std::vector<T> alpha(nbrs.nnz());
  std::vector<std::uint8_t> positive(nbrs.nnz());
  for (std::size_t i = 0; i < l; ++i) {
    const std::size_t lo = nbrs.offsets[i], hi = nbrs.offsets[i + 1];
    if (lo == hi) continue;
    T mx = -std::numeric_limits<T>::infinity();
    for (std::size_t e = lo; e < hi; ++e) {
      const T pre = center[i] + neighbor[nbrs.cols[e]];
      positive[e] = pre > T{0};
      alpha[e] = positive[e] ? pre : slope * pre;
      mx = std::max(mx, alpha[e]);
    }
    if (!std::isfinite(mx)) throw NumericError("gat_aggregate: non-finite scores");
    T zsum{0};
    for (std::size_t e = lo; e < hi; ++e) zsum += (alpha[e] = std::exp(alpha[e] - mx));
    T* y = out.data() + i * d;
    for (std::size_t e = lo; e < hi; ++e) {
      alpha[e] /= zsum;
      const T* zj = z.data() + nbrs.cols[e] * d;
      for (std::size_t c = 0; c < d; ++c) y[c] += alpha[e] * zj[c];
    }
  }
  if (coeffs_out) *coeffs_out = alpha;
  if (track) {
    tape.record(out, [z, center, neighbor, out, csr = nbrs, alpha = std::move(alpha),
                      positive = std::move(positive), slope, l, d]() mutable {
      auto g = out.grad();
      T* gz = z.requires_grad() ? z.ensure_grad().data() : nullptr;
      T* gc = center.requires_grad() ? center.ensure_grad().data() : nullptr;
      T* gn = neighbor.requires_grad() ? neighbor.ensure_grad().data() : nullptr;
      std::vector<T> da;
      for (std::size_t i = 0; i < l; ++i) {
        const std::size_t lo = csr.offsets[i], hi = csr.offsets[i + 1];
        const T* gi = g.data() + i * d;
        da.assign(hi - lo, T{0});
        T dot{0};
        for (std::size_t e = lo; e < hi; ++e) {
          const std::size_t j = csr.cols[e];
          const T* zj = z.data() + j * d;
          T acc{0};
          for (std::size_t c = 0; c < d; ++c) acc += gi[c] * zj[c];
          da[e - lo] = acc;
          dot += acc * alpha[e];
          if (gz)
            for (std::size_t c = 0; c < d; ++c) gz[j * d + c] += alpha[e] * gi[c];
        }
        for (std::size_t e = lo; e < hi; ++e) {
          const T de = alpha[e] * (da[e - lo] - dot);
          const T dpre = positive[e] ? de : slope * de;
          if (gc) gc[i] += dpre;
          if (gn) gn[csr.cols[e]] += dpre;
        }
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> detach(const Tensor<T>& x) {
  return x.clone();
}

#define XLB_INSTANTIATE_OPS(T)                                                                   \
  template Tensor<T> matmul(Tape<T>&, const Tensor<T>&, const Tensor<T>&);                       \
  template Tensor<T> affine(Tape<T>&, const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);     \
  template Tensor<T> matvec(Tape<T>&, const Tensor<T>&, const Tensor<T>&);                       \
  template Tensor<T> add(Tape<T>&, const Tensor<T>&, const Tensor<T>&);                          \
  template Tensor<T> sub(Tape<T>&, const Tensor<T>&, const Tensor<T>&);                          \
  template Tensor<T> mul(Tape<T>&, const Tensor<T>&, const Tensor<T>&);                          \
  template Tensor<T> scale(Tape<T>&, const Tensor<T>&, T);                                       \
  template Tensor<T> add_bias(Tape<T>&, const Tensor<T>&, const Tensor<T>&);                     \
  template Tensor<T> relu(Tape<T>&, const Tensor<T>&);                                           \
  template Tensor<T> gelu(Tape<T>&, const Tensor<T>&);                                           \
  template Tensor<T> elu(Tape<T>&, const Tensor<T>&, T);                                         \
  template Tensor<T> leaky_relu(Tape<T>&, const Tensor<T>&, T);                                  \
  template Tensor<T> softmax(Tape<T>&, const Tensor<T>&);                                        \
  template Tensor<T> layer_norm(Tape<T>&, const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,  \
                                T);                                                              \
  template Tensor<T> sum(Tape<T>&, const Tensor<T>&);                                            \
  template Tensor<T> mean(Tape<T>&, const Tensor<T>&);                                           \
  template Tensor<T> embedding(Tape<T>&, const Tensor<T>&, std::span<const std::int32_t>);       \
  template Tensor<T> gather_rows(Tape<T>&, const Tensor<T>&, std::span<const std::size_t>);      \
  template Tensor<T> masked_lerp(Tape<T>&, const Tensor<T>&, const Tensor<T>&, T,                \
                                 std::span<const std::uint8_t>);                                 \
  template Tensor<T> dropout(Tape<T>&, const Tensor<T>&, T, Rng&);                               \
  template Tensor<T> attention(Tape<T>&, const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,   \
                               const SeqLayout&, std::size_t, std::vector<T>*);                  \
  template Tensor<T> spmm(Tape<T>&, const Csr&, const Tensor<T>&);                               \
  template Tensor<T> gat_aggregate(Tape<T>&, const Tensor<T>&, const Tensor<T>&,                 \
                                   const Tensor<T>&, const Csr&, T, std::vector<T>*);            \
  template Tensor<T> detach(const Tensor<T>&);

XLB_INSTANTIATE_OPS(float)
XLB_INSTANTIATE_OPS(double)

}  // namespace xlb::num
