// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace swaplab {

enum class Activation { kRelu, kTanh };

Activation activation_from_string(const std::string& s);
std::string to_string(Activation a);

/// Feedforward architecture: dense layers, optional batch norm per hidden
/// layer, relu/tanh nonlinearity, softmax cross-entropy head.
struct ModelSpec {
  std::vector<int> layer_sizes;         // input dim, hidden dims..., classes
  std::vector<uint8_t> use_batchnorm;   // one flag per hidden layer
  Activation activation = Activation::kRelu;

  int input_dim() const { return layer_sizes.front(); }
  int num_classes() const { return layer_sizes.back(); }
  int num_layers() const { return static_cast<int>(layer_sizes.size()) - 1; }
  int hidden_count() const { return num_layers() - 1; }
  bool layer_has_bn(int hidden) const { return use_batchnorm[static_cast<size_t>(hidden)] != 0; }
  bool has_batchnorm() const;

  /// Throws ContractError when sizes or flags are inconsistent.
  void validate() const;
};

/// Convenience constructor; a single bn flag is broadcast to all hidden layers.
ModelSpec make_model_spec(std::vector<int> layer_sizes, bool batchnorm,
                          Activation act = Activation::kRelu);

}  // namespace swaplab
