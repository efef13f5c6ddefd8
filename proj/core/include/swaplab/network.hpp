// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "swaplab/dataset.hpp"
#include "swaplab/matrix.hpp"
#include "swaplab/model.hpp"
#include "swaplab/weights.hpp"

namespace swaplab {

enum class ForwardMode { kTrain, kEval };

/// Everything the backward pass needs from one forward pass. Opaque to
/// callers; only loss_and_grad's internals read it.
struct ForwardCache {
  ForwardMode mode = ForwardMode::kTrain;
  std::vector<Matrix> layer_inputs;          // X_l for every affine layer
  std::vector<Matrix> bn_xhat;               // per hidden layer, empty when no BN
  std::vector<std::vector<double>> bn_inv_s; // 1/sqrt(var+eps) per feature
};

struct ForwardResult {
  Matrix logits;
  ForwardCache cache;
};

/// Train mode normalizes with batch statistics, eval mode with running
/// statistics; neither mutates the model. Train-mode BN needs batch size >= 2.
ForwardResult forward(const WeightVector& model, const ModelSpec& spec, const Batch& batch,
                      ForwardMode mode);

/// Mean softmax cross-entropy over the batch.
double mean_cross_entropy(const Matrix& logits, const std::vector<int>& labels);

struct LossGrad {
  double loss = 0.0;
  Gradient grad;
};

/// Loss and its exact gradient (train-mode forward); the 1/|B| mean is
/// already folded into both. train_acc_out, when given, receives the batch's
/// train-mode accuracy computed from the same forward pass.
LossGrad loss_and_grad(const WeightVector& model, const ModelSpec& spec, const Batch& batch,
                       double* train_acc_out = nullptr);

/// Train-mode loss only; the finite-difference harness probes this.
double loss_value(const WeightVector& model, const ModelSpec& spec, const Batch& batch);

/// Replaces BN running stats with the exact per-feature mean/variance of each
/// layer's pre-BN activations over one full pass of `data`; layers upstream
/// are normalized with their freshly computed statistics. Trainable
/// parameters are untouched; models without BN come back unchanged.
WeightVector recompute_bn_stats(const WeightVector& model, const ModelSpec& spec,
                                const Dataset& data);

struct EvalResult {
  double accuracy = 0.0;
  double mean_loss = 0.0;
};

/// Eval-mode accuracy (argmax, ties to the lowest class index) and mean loss.
EvalResult evaluate(const WeightVector& model, const ModelSpec& spec, const Dataset& data);

}  // namespace swaplab
