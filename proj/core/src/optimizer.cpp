// SPDX-License-Identifier: Apache-2.0
#include "swaplab/optimizer.hpp"

#include "swaplab/error.hpp"

namespace swaplab {

void OptimizerConfig::validate() const {
  check(momentum >= 0.0 && momentum < 1.0, "optimizer: momentum must be in [0,1)");
  check(weight_decay >= 0.0, "optimizer: weight_decay must be >= 0");
}

OptimizerState make_optimizer_state(const WeightVector& model) {
  return OptimizerState{zeros_like(model)};
}

void sgd_update_inplace(WeightVector& model, OptimizerState& state, const Gradient& grad,
                        double lr, const OptimizerConfig& cfg) {
  cfg.validate();
  check(lr >= 0.0, "sgd_update: lr must be >= 0");
  check(model.params.size() == grad.params.size() &&
            model.params.size() == state.velocity.params.size(),
        "sgd_update: model/grad/state layout mismatch");

  for (size_t t = 0; t < model.params.size(); ++t) {
    auto& theta = model.params[t];
    const auto& g = grad.params[t];
    auto& v = state.velocity.params[t];
    check(theta.size() == g.size() && theta.size() == v.size(),
          "sgd_update: tensor size mismatch at " + theta.name);

    bool decayed = cfg.weight_decay > 0.0 &&
                   (cfg.decay_bn_params || theta.kind == ParamKind::kWeight);
    double wd = decayed ? cfg.weight_decay : 0.0;
    for (size_t i = 0; i < theta.size(); ++i) {
      double gi = g.data[i] + wd * theta.data[i];
      double vi = cfg.momentum * v.data[i] + gi;
      v.data[i] = vi;
      double step = cfg.nesterov ? cfg.momentum * vi + gi : vi;
      theta.data[i] -= lr * step;
    }
  }
}

std::pair<WeightVector, OptimizerState> sgd_update(const WeightVector& model,
                                                   const OptimizerState& state,
                                                   const Gradient& grad, double lr,
                                                   const OptimizerConfig& cfg) {
  WeightVector m = model;
  OptimizerState s = state;
  sgd_update_inplace(m, s, grad, lr, cfg);
  return {std::move(m), std::move(s)};
}

}  // namespace swaplab
