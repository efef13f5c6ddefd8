// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>

#include "swaplab/weights.hpp"

namespace swaplab {

struct OptimizerConfig {
  double momentum = 0.9;
  double weight_decay = 0.0;
  bool nesterov = true;
  /// When false, biases and BN gamma/beta are excluded from weight decay.
  bool decay_bn_params = false;

  void validate() const;
};

/// Momentum buffer, zero-initialized, one velocity slot per trainable tensor.
struct OptimizerState {
  Gradient velocity;
};

OptimizerState make_optimizer_state(const WeightVector& model);

/// One SGD step with Nesterov momentum and coupled weight decay:
///   g' = grad + weight_decay * theta     (masked per decay_bn_params)
///   v  = momentum * v + g'
///   theta -= lr * (momentum * v + g')    (nesterov)  or  lr * v
/// Mutates model and state in place.
void sgd_update_inplace(WeightVector& model, OptimizerState& state, const Gradient& grad,
                        double lr, const OptimizerConfig& cfg);

/// Value-in/value-out form of the same update; inputs are left unmodified.
std::pair<WeightVector, OptimizerState> sgd_update(const WeightVector& model,
                                                   const OptimizerState& state,
                                                   const Gradient& grad, double lr,
                                                   const OptimizerConfig& cfg);

}  // namespace swaplab
