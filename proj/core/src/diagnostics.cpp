// SPDX-License-Identifier: Apache-2.0
#include "swaplab/diagnostics.hpp"

#include <cmath>

#include "swaplab/error.hpp"
#include "swaplab/network.hpp"

namespace swaplab {

namespace {

double vdot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double vnorm(const std::vector<double>& a) { return std::sqrt(vdot(a, a)); }

}  // namespace

PlaneBasis plane_basis(const WeightVector& theta1, const WeightVector& theta2,
                       const WeightVector& theta3) {
  check(theta1.same_layout(theta2) && theta1.same_layout(theta3),
        "plane_basis: weight vectors have different layouts");

  std::vector<double> f1 = theta1.flatten();
  std::vector<double> f2 = theta2.flatten();
  std::vector<double> f3 = theta3.flatten();
  size_t n = f1.size();

  std::vector<double> a(n), b(n);
  for (size_t i = 0; i < n; ++i) {
    a[i] = f2[i] - f1[i];
    b[i] = f3[i] - f1[i];
  }
  double na = vnorm(a);
  double nb = vnorm(b);
  check(na > 0.0 && nb > 0.0, "plane_basis: degenerate plane (coincident points)");

  PlaneBasis basis;
  basis.origin = theta1;
  basis.u.resize(n);
  for (size_t i = 0; i < n; ++i) basis.u[i] = a[i] / na;

  double proj = vdot(b, basis.u);
  std::vector<double> w(n);
  for (size_t i = 0; i < n; ++i) w[i] = b[i] - proj * basis.u[i];
  double nw = vnorm(w);
  // Relative tolerance: the rejected component must not be noise-level
  // relative to b, otherwise the three points are (numerically) collinear.
  check(nw > 1e-12 * nb, "plane_basis: degenerate plane (collinear points)");
  basis.v.resize(n);
  for (size_t i = 0; i < n; ++i) basis.v[i] = w[i] / nw;

  basis.coords[0] = {0.0, 0.0};
  basis.coords[1] = {na, 0.0};
  basis.coords[2] = {proj, nw};
  return basis;
}

WeightVector reconstruct(const PlaneBasis& basis, double alpha, double beta) {
  WeightVector out = basis.origin;
  std::vector<double> flat = out.flatten();
  for (size_t i = 0; i < flat.size(); ++i)
    flat[i] += alpha * basis.u[i] + beta * basis.v[i];
  out.unflatten(flat);
  return out;
}

SurfaceGrid loss_surface(const PlaneBasis& basis, const GridSpec& grid, const ModelSpec& spec,
                         const Dataset& train_data, const Dataset& test_data,
                         const std::array<std::string, 3>& labels, ThreadPool& pool) {
  check(grid.resolution_alpha >= 2 && grid.resolution_beta >= 2,
        "loss_surface: resolution must be >= 2 per axis");

  auto default_range = [&](bool alpha_axis) -> std::pair<double, double> {
    double lo = basis.coords[0].first, hi = lo;
    for (const auto& [ca, cb] : basis.coords) {
      double c = alpha_axis ? ca : cb;
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
    double extent = hi - lo;
    if (extent <= 0.0) extent = 1.0;  // flat axis: give the grid some width
    return {lo - 0.3 * extent, hi + 0.3 * extent};
  };
  auto [a_lo, a_hi] = grid.alpha_range ? *grid.alpha_range : default_range(true);
  auto [b_lo, b_hi] = grid.beta_range ? *grid.beta_range : default_range(false);
  check(a_hi > a_lo && b_hi > b_lo, "loss_surface: empty grid range");

  SurfaceGrid out;
  out.alphas.resize(static_cast<size_t>(grid.resolution_alpha));
  out.betas.resize(static_cast<size_t>(grid.resolution_beta));
  for (int i = 0; i < grid.resolution_alpha; ++i)
    out.alphas[static_cast<size_t>(i)] =
        a_lo + (a_hi - a_lo) * i / (grid.resolution_alpha - 1);
  for (int i = 0; i < grid.resolution_beta; ++i)
    out.betas[static_cast<size_t>(i)] = b_lo + (b_hi - b_lo) * i / (grid.resolution_beta - 1);

  size_t rows = out.betas.size(), cols = out.alphas.size();
  out.train_error_pct = Matrix(rows, cols);
  out.test_error_pct = Matrix(rows, cols);

  auto eval_point = [&](double alpha, double beta, double* train_err, double* test_err) {
    WeightVector theta = reconstruct(basis, alpha, beta);
    WeightVector fresh = recompute_bn_stats(theta, spec, train_data);
    try {
      *train_err = 100.0 * (1.0 - evaluate(fresh, spec, train_data).accuracy);
      *test_err = 100.0 * (1.0 - evaluate(fresh, spec, test_data).accuracy);
    } catch (const std::exception& e) {
      throw NumericError("loss_surface at (" + std::to_string(alpha) + ", " +
                         std::to_string(beta) + "): " + e.what());
    }
  };

  int total = static_cast<int>(rows * cols);
  pool.parallel_for(total, [&](int k) {
    size_t r = static_cast<size_t>(k) / cols;
    size_t c = static_cast<size_t>(k) % cols;
    eval_point(out.alphas[c], out.betas[r], &out.train_error_pct.data[static_cast<size_t>(k)],
               &out.test_error_pct.data[static_cast<size_t>(k)]);
  });

  for (size_t p = 0; p < 3; ++p) {
    MarkedPoint mp;
    mp.label = labels[p];
    mp.alpha = basis.coords[p].first;
    mp.beta = basis.coords[p].second;
    eval_point(mp.alpha, mp.beta, &mp.train_error_pct, &mp.test_error_pct);
    out.marked.push_back(std::move(mp));
  }

  // BEST: grid argmin of test error, first hit in row-major order.
  size_t best = 0;
  for (size_t k = 1; k < out.test_error_pct.size(); ++k) {
    if (out.test_error_pct.data[k] < out.test_error_pct.data[best]) best = k;
  }
  MarkedPoint bp;
  bp.label = "BEST";
  bp.alpha = out.alphas[best % cols];
  bp.beta = out.betas[best / cols];
  bp.train_error_pct = out.train_error_pct.data[best];
  bp.test_error_pct = out.test_error_pct.data[best];
  out.marked.push_back(std::move(bp));
  return out;
}

CosineTrace cosine_trace(const std::vector<TraceSnapshot>& snapshots,
                         const WeightVector& theta_swap) {
  std::vector<double> target = theta_swap.flatten();
  CosineTrace trace;
  trace.records.reserve(snapshots.size());
  for (const auto& snap : snapshots) {
    CosineRecord rec;
    rec.phase = snap.phase;
    rec.step = snap.step;
    rec.epoch = snap.epoch;

    std::vector<double> at = snap.theta.flatten();
    check(at.size() == target.size(), "cosine_trace: layout mismatch with theta_swap");
    double dot = 0.0, d2 = 0.0, g2 = 0.0;
    size_t off = 0;
    for (const auto& t : snap.grad.params) {
      for (size_t i = 0; i < t.data.size(); ++i, ++off) {
        double delta = target[off] - at[off];
        double g = t.data[i];
        dot += delta * (-g);
        d2 += delta * delta;
        g2 += g * g;
      }
    }
    if (d2 == 0.0 || g2 == 0.0) {
      rec.defined = false;
      rec.cosine = 0.0;
    } else {
      rec.cosine = dot / (std::sqrt(g2) * std::sqrt(d2));
    }
    trace.records.push_back(rec);
  }
  return trace;
}

}  // namespace swaplab
