// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "swaplab/dataset.hpp"
#include "swaplab/matrix.hpp"
#include "swaplab/model.hpp"
#include "swaplab/runtime.hpp"
#include "swaplab/thread_pool.hpp"
#include "swaplab/weights.hpp"

namespace swaplab {

/// Orthonormal plane through three weight vectors. Directions u, v live on
/// the flat trainable parameters only; BN running stats never enter the basis
/// (they are recomputed per visualized point).
struct PlaneBasis {
  WeightVector origin;                                // theta_1
  std::vector<double> u, v;                           // unit, mutually orthogonal
  std::array<std::pair<double, double>, 3> coords;    // (alpha, beta) of the three points
};

/// Gram-Schmidt on (theta2 - theta1, theta3 - theta1). Collinear or
/// coincident points raise ContractError ("degenerate plane").
PlaneBasis plane_basis(const WeightVector& theta1, const WeightVector& theta2,
                       const WeightVector& theta3);

/// theta_1 + alpha*u + beta*v; BN running stats copied from the origin
/// (loss_surface recomputes them per point).
WeightVector reconstruct(const PlaneBasis& basis, double alpha, double beta);

struct GridSpec {
  int resolution_alpha = 25;
  int resolution_beta = 25;
  /// Defaults: bounding box of the three defining coords, widened by 30% of
  /// its extent on each side.
  std::optional<std::pair<double, double>> alpha_range;
  std::optional<std::pair<double, double>> beta_range;
};

struct MarkedPoint {
  std::string label;
  double alpha = 0.0;
  double beta = 0.0;
  double train_error_pct = 0.0;
  double test_error_pct = 0.0;
};

struct SurfaceGrid {
  std::vector<double> alphas;   // resolution_alpha values, ascending
  std::vector<double> betas;    // resolution_beta values, ascending
  Matrix train_error_pct;       // [betas x alphas]
  Matrix test_error_pct;
  std::vector<MarkedPoint> marked;  // three defining points + BEST (grid argmin of test error)
};

/// Per grid point: materialize theta_1 + alpha*u + beta*v, recompute BN stats
/// over train_data, evaluate train and test error (percent). Points are
/// independent and evaluated concurrently; output order is fixed row-major.
SurfaceGrid loss_surface(const PlaneBasis& basis, const GridSpec& grid, const ModelSpec& spec,
                         const Dataset& train_data, const Dataset& test_data,
                         const std::array<std::string, 3>& labels, ThreadPool& pool);

struct CosineRecord {
  int phase = 1;
  long step = 0;
  int epoch = 0;
  double cosine = 0.0;
  bool defined = true;  // false when the gradient or displacement is zero
};

struct CosineTrace {
  std::vector<CosineRecord> records;
};

/// Per snapshot: cos(theta_swap - theta_i, -g_i). Zero gradient or zero
/// displacement yields an undefined (flagged) record rather than a value.
CosineTrace cosine_trace(const std::vector<TraceSnapshot>& snapshots,
                         const WeightVector& theta_swap);

}  // namespace swaplab
