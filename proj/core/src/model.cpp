// SPDX-License-Identifier: Apache-2.0
#include "swaplab/model.hpp"

#include "swaplab/error.hpp"

namespace swaplab {

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "tanh") return Activation::kTanh;
  throw ParseError("unknown activation: " + s);
}

std::string to_string(Activation a) {
  return a == Activation::kRelu ? "relu" : "tanh";
}

bool ModelSpec::has_batchnorm() const {
  for (uint8_t f : use_batchnorm) {
    if (f) return true;
  }
  return false;
}

void ModelSpec::validate() const {
  check(layer_sizes.size() >= 2, "model: need at least input and output layer sizes");
  for (int s : layer_sizes) check(s >= 1, "model: all layer sizes must be >= 1");
  check(layer_sizes.back() >= 2, "model: output size (classes) must be >= 2");
  check(use_batchnorm.size() == static_cast<size_t>(hidden_count()),
        "model: use_batchnorm needs one flag per hidden layer");
}

ModelSpec make_model_spec(std::vector<int> layer_sizes, bool batchnorm, Activation act) {
  ModelSpec spec;
  spec.layer_sizes = std::move(layer_sizes);
  spec.use_batchnorm.assign(
      spec.layer_sizes.size() >= 2 ? spec.layer_sizes.size() - 2 : 0,
      batchnorm ? 1 : 0);
  spec.activation = act;
  spec.validate();
  return spec;
}

}  // namespace swaplab
