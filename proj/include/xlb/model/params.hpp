// Copyright 2026 The xlbridge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef XLB_MODEL_PARAMS_HPP
#define XLB_MODEL_PARAMS_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "xlb/model/config.hpp"
#include "xlb/numerics/tensor.hpp"

namespace xlb::model {

/// Named learnable tensors in canonical (construction) order.
template <typename T>
class ParamStore {
 public:
  num::Tensor<T>& add(const std::string& name, num::Shape shape);
  num::Tensor<T>& at(const std::string& name);
  const num::Tensor<T>& at(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  const std::vector<std::string>& names() const { return names_; }
  std::size_t total_size() const;
  void zero_grad();

  template <typename U>
  ParamStore<U> cast() const {
    ParamStore<U> out;
    for (const auto& n : names_) {
      const auto& src = at(n);
      auto& dst = out.add(n, src.shape());
      for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<U>(src[i]);
    }
    return out;
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, num::Tensor<T>> index_;
};

/// Every parameter name and shape implied by a configuration, in canonical order.
std::vector<std::pair<std::string, num::Shape>> parameter_layout(const EncoderConfig& cfg);

/// Allocates and initializes parameters: embeddings and GAT score vectors
/// N(0, init_std), dense projections N(0, 1/fan_in) (or N(0, init_std) when
/// fan_in_init is off), biases 0, layer-norm gains 1, GNN weights
/// Glorot-normal or identity. Fully determined by cfg.seed.
template <typename T>
ParamStore<T> init_params(const EncoderConfig& cfg);

/// Closed-form learnable scalar count.
std::uint64_t count_parameters(const EncoderConfig& cfg);

/// Count for a stack described only by its widths (used for large-model parity arithmetic).
struct StackShape {
  std::uint64_t vocab_size = 0;
  std::uint64_t max_len = 0;
  std::uint64_t d_model = 0;
  std::uint64_t d_ff = 0;
  std::uint64_t transformer_layers = 0;
  std::uint64_t gcn_layers = 0;
  std::uint64_t gat_layers = 0;
  bool gcn_bias = false;
  std::uint64_t hal_layers = 0;
  std::uint64_t num_labels = 2;
};
std::uint64_t count_parameters(const StackShape& s);

extern template class ParamStore<float>;
extern template class ParamStore<double>;

}  // namespace xlb::model

#endif  // XLB_MODEL_PARAMS_HPP
