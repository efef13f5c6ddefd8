// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "swaplab/dataset.hpp"
#include "swaplab/model.hpp"
#include "swaplab/network.hpp"
#include "swaplab/rng.hpp"
#include "swaplab/weights.hpp"

namespace testutil {

/// Scratch directory removed on destruction.
struct TmpDir {
  std::filesystem::path path;
  explicit TmpDir(const std::string& stem) {
    path = std::filesystem::temp_directory_path() /
           (stem + "-" + std::to_string(::getpid()) + "-" +
            std::to_string(reinterpret_cast<uintptr_t>(this)));
    std::filesystem::create_directories(path);
  }
  ~TmpDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline swaplab::Batch random_batch(int n, int d, int classes, swaplab::RngStream& rng,
                                   double scale = 1.0) {
  swaplab::Batch b;
  b.inputs = swaplab::Matrix(static_cast<size_t>(n), static_cast<size_t>(d));
  for (auto& v : b.inputs.data) v = scale * rng.next_normal();
  b.labels.resize(static_cast<size_t>(n));
  for (auto& y : b.labels) y = static_cast<int>(rng.next_below(static_cast<uint64_t>(classes)));
  return b;
}

inline swaplab::Dataset blobs(int n, int d, int classes, double noise, uint64_t seed) {
  return swaplab::generate_synthetic(swaplab::SyntheticKind::kGaussianBlobs, n, d, classes,
                                     noise, seed);
}

/// Central finite differences of the train-mode loss, coordinate by
/// coordinate; the gradient-exactness oracle.
inline swaplab::Gradient fd_gradient(const swaplab::WeightVector& model,
                                     const swaplab::ModelSpec& spec, const swaplab::Batch& batch,
                                     double eps = 1e-4) {
  swaplab::Gradient g = swaplab::zeros_like(model);
  swaplab::WeightVector probe = model;
  for (size_t t = 0; t < probe.params.size(); ++t) {
    for (size_t i = 0; i < probe.params[t].data.size(); ++i) {
      double orig = probe.params[t].data[i];
      probe.params[t].data[i] = orig + eps;
      double up = swaplab::loss_value(probe, spec, batch);
      probe.params[t].data[i] = orig - eps;
      double down = swaplab::loss_value(probe, spec, batch);
      probe.params[t].data[i] = orig;
      g.params[t].data[i] = (up - down) / (2.0 * eps);
    }
  }
  return g;
}

/// Scale-normalized per-coordinate error: |a-b| / max(1, |a|, |b|).
inline double max_rel_err(const swaplab::Gradient& a, const swaplab::Gradient& b) {
  double worst = 0.0;
  for (size_t t = 0; t < a.params.size(); ++t) {
    for (size_t i = 0; i < a.params[t].data.size(); ++i) {
      double x = a.params[t].data[i], y = b.params[t].data[i];
      double denom = std::max({1.0, std::fabs(x), std::fabs(y)});
      worst = std::max(worst, std::fabs(x - y) / denom);
    }
  }
  return worst;
}

inline double max_abs_diff(const swaplab::WeightVector& a, const swaplab::WeightVector& b) {
  double worst = 0.0;
  for (size_t t = 0; t < a.params.size(); ++t) {
    for (size_t i = 0; i < a.params[t].data.size(); ++i)
      worst = std::max(worst, std::fabs(a.params[t].data[i] - b.params[t].data[i]));
  }
  return worst;
}

}  // namespace testutil
