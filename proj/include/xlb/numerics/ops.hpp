// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef XLB_NUMERICS_OPS_HPP
#define XLB_NUMERICS_OPS_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "xlb/common/rng.hpp"
#include "xlb/numerics/tape.hpp"
#include "xlb/numerics/tensor.hpp"

// Differentiable operations. Every op records its backward on the tape when
// the tape is enabled and at least one operand requires a gradient. Apart
// from trailing-axis affine ops (add_bias, layer_norm gain/bias) there is no
// broadcasting: shapes must match exactly or a DimensionError is thrown.
namespace xlb::num {

/// Batch of B padded sequences of length S stored as B*S consecutive rows.
struct SeqLayout {
  std::size_t batch = 0;
  std::size_t seq_len = 0;
  std::vector<std::size_t> lengths;  // valid prefix per sequence, >= 1

  std::size_t rows() const { return batch * seq_len; }
  bool valid(std::size_t row) const { return row % seq_len < lengths[row / seq_len]; }
};

/// Compressed sparse rows; row i owns entries [offsets[i], offsets[i+1]).
struct Csr {
  std::size_t rows = 0;
  std::vector<std::size_t> offsets{0};
  std::vector<std::size_t> cols;
  std::vector<double> weights;  // unused by gat_aggregate

  std::size_t nnz() const { return cols.size(); }
};

template <typename T> Tensor<T> matmul(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b);

/// x[N x K] * w[K x M] + bias[M]. `bias` may be undefined.
template <typename T>
Tensor<T> affine(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias);

/// z[L x D] * a[D] -> [L]
template <typename T> Tensor<T> matvec(Tape<T>& tape, const Tensor<T>& z, const Tensor<T>& a);

template <typename T> Tensor<T> add(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> sub(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> mul(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> scale(Tape<T>& tape, const Tensor<T>& a, T factor);
/// x[... x D] + bias[D]
template <typename T> Tensor<T> add_bias(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& bias);

template <typename T> Tensor<T> relu(Tape<T>& tape, const Tensor<T>& x);
/// Exact (erf) GELU.
template <typename T> Tensor<T> gelu(Tape<T>& tape, const Tensor<T>& x);
template <typename T> Tensor<T> elu(Tape<T>& tape, const Tensor<T>& x, T alpha = T{1});
template <typename T> Tensor<T> leaky_relu(Tape<T>& tape, const Tensor<T>& x, T slope);

/// Softmax over the last axis with max-subtraction. Throws NumericError on non-finite input.
template <typename T> Tensor<T> softmax(Tape<T>& tape, const Tensor<T>& x);

template <typename T>
Tensor<T> layer_norm(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& gain, const Tensor<T>& bias,
                     T eps);

template <typename T> Tensor<T> sum(Tape<T>& tape, const Tensor<T>& x);
template <typename T> Tensor<T> mean(Tape<T>& tape, const Tensor<T>& x);

/// Rows of table[V x D] selected by ids -> [N x D]. Out-of-range ids throw IndexError.
template <typename T>
Tensor<T> embedding(Tape<T>& tape, const Tensor<T>& table, std::span<const std::int32_t> ids);

/// Rows of x[N x D] selected by index -> [M x D].
template <typename T>
Tensor<T> gather_rows(Tape<T>& tape, const Tensor<T>& x, std::span<const std::size_t> index);

/// Row-wise lerp: out_r = alpha*other_r + (1-alpha)*base_r where row_mask[r], else base_r.
/// alpha == 0 and alpha == 1 copy the selected side exactly.
template <typename T>
Tensor<T> masked_lerp(Tape<T>& tape, const Tensor<T>& base, const Tensor<T>& other, T alpha,
                      std::span<const std::uint8_t> row_mask);

/// Inverted dropout; identity when p == 0.
template <typename T> Tensor<T> dropout(Tape<T>& tape, const Tensor<T>& x, T p, Rng& rng);

/// Multi-head scaled dot-product attention over q, k, v [B*S x D]. Keys at
/// padded positions get probability 0. When `probs` is given it receives the
/// [B x H x S x S] attention matrix.
template <typename T>
Tensor<T> attention(Tape<T>& tape, const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                    const SeqLayout& layout, std::size_t heads, std::vector<T>* probs = nullptr);

/// y_i = sum_e weights_e * x[cols_e] over the CSR row i.
template <typename T> Tensor<T> spmm(Tape<T>& tape, const Csr& adj, const Tensor<T>& x);

/// Neighborhood softmax aggregation used by graph attention:
///   e_ij = LeakyReLU(center[i] + neighbor[j]), alpha_ij = softmax_j(e_ij),
///   out_i = sum_j alpha_ij z_j
/// over the CSR neighbor lists (self-loops included by the caller).
template <typename T>
Tensor<T> gat_aggregate(Tape<T>& tape, const Tensor<T>& z, const Tensor<T>& center,
                        const Tensor<T>& neighbor, const Csr& nbrs, T slope,
                        std::vector<T>* coeffs = nullptr);

/// Same values, cut from the tape.
template <typename T> Tensor<T> detach(const Tensor<T>& x);

}  // namespace xlb::num

#endif  // XLB_NUMERICS_OPS_HPP
