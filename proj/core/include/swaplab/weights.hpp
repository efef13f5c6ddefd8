// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "swaplab/matrix.hpp"
#include "swaplab/model.hpp"
#include "swaplab/rng.hpp"

namespace swaplab {

enum class ParamKind : uint8_t { kWeight, kBias, kBnScale, kBnShift };

std::string to_string(ParamKind k);

/// One named trainable tensor. Vectors (bias, gamma, beta) use rows == 1.
struct Tensor {
  std::string name;
  ParamKind kind = ParamKind::kWeight;
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> data;

  size_t size() const { return data.size(); }
};

/// Running statistics of one batch-norm layer. Variances stay strictly
/// positive (recomputation floors them at kBnEpsilon).
struct BnStats {
  std::vector<double> mean;
  std::vector<double> var;
  bool empty() const { return mean.empty(); }
};

constexpr double kBnEpsilon = 1e-5;

/// Gradient of the loss w.r.t. the trainable parameters; same tensor layout
/// as the WeightVector it differentiates.
struct Gradient {
  std::vector<Tensor> params;

  size_t flat_size() const;
  void fill(double v);
  double dot(const Gradient& o) const;
  double norm() const;
  double max_abs() const;
};

/// Ordered parameter state of one model: trainable tensors plus batch-norm
/// running statistics. add/scale/dot/norm operate on the flat trainable
/// vector only; running stats ride along and are recomputed, never trained.
struct WeightVector {
  std::vector<Tensor> params;
  std::vector<BnStats> bn;  // one slot per hidden layer; empty when the layer has no BN

  size_t flat_size() const;
  bool same_layout(const WeightVector& o) const;

  /// this += a * g  (trainable part)
  void axpy(double a, const Gradient& g);
  /// this += a * o  (trainable part)
  void axpy(double a, const WeightVector& o);
  void scale(double a);
  double dot(const WeightVector& o) const;
  double norm() const;

  /// Flat copy of the trainable parameters, in tensor order.
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> flat);

  /// FNV-1a over the raw bytes of trainable tensors and running stats;
  /// phase 1 uses this to verify replicas stay identical.
  uint64_t checksum() const;
};

/// Glorot-uniform init in +-sqrt(6/(fan_in+fan_out)); biases and BN shifts 0,
/// BN scales 1, running stats (0, 1).
WeightVector init_weights(const ModelSpec& spec, RngStream& rng);

Gradient zeros_like(const WeightVector& w);

/// Uniform mean of the trainable parts; bn stats copied from the first model
/// (callers recompute them). All models must share a layout.
WeightVector average_weights(const std::vector<WeightVector>& models);

}  // namespace swaplab
