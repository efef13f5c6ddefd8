// SPDX-License-Identifier: Apache-2.0
#include "swaplab/weights.hpp"

#include <algorithm>
#include <cmath>

#include "swaplab/error.hpp"

namespace swaplab {

std::string to_string(ParamKind k) {
  switch (k) {
    case ParamKind::kWeight: return "weight";
    case ParamKind::kBias: return "bias";
    case ParamKind::kBnScale: return "bn_scale";
    case ParamKind::kBnShift: return "bn_shift";
  }
  return "?";
}

size_t Gradient::flat_size() const {
  size_t n = 0;
  for (const auto& t : params) n += t.size();
  return n;
}

void Gradient::fill(double v) {
  for (auto& t : params) {
    for (auto& x : t.data) x = v;
  }
}

double Gradient::dot(const Gradient& o) const {
  check(params.size() == o.params.size(), "gradient dot: layout mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < params.size(); ++i) {
    const auto& a = params[i].data;
    const auto& b = o.params[i].data;
    check(a.size() == b.size(), "gradient dot: tensor size mismatch");
    for (size_t j = 0; j < a.size(); ++j) acc += a[j] * b[j];
  }
  return acc;
}

double Gradient::norm() const { return std::sqrt(dot(*this)); }

double Gradient::max_abs() const {
  double m = 0.0;
  for (const auto& t : params) {
    for (double v : t.data) m = std::max(m, std::fabs(v));
  }
  return m;
}

size_t WeightVector::flat_size() const {
  size_t n = 0;
  for (const auto& t : params) n += t.size();
  return n;
}

bool WeightVector::same_layout(const WeightVector& o) const {
  if (params.size() != o.params.size() || bn.size() != o.bn.size()) return false;
  for (size_t i = 0; i < params.size(); ++i) {
    if (params[i].rows != o.params[i].rows || params[i].cols != o.params[i].cols ||
        params[i].kind != o.params[i].kind)
      return false;
  }
  for (size_t i = 0; i < bn.size(); ++i) {
    if (bn[i].mean.size() != o.bn[i].mean.size()) return false;
  }
  return true;
}

void WeightVector::axpy(double a, const Gradient& g) {
  check(params.size() == g.params.size(), "axpy: layout mismatch");
  for (size_t i = 0; i < params.size(); ++i) {
    auto& dst = params[i].data;
    const auto& src = g.params[i].data;
    check(dst.size() == src.size(), "axpy: tensor size mismatch");
    for (size_t j = 0; j < dst.size(); ++j) dst[j] += a * src[j];
  }
}

void WeightVector::axpy(double a, const WeightVector& o) {
  check(params.size() == o.params.size(), "axpy: layout mismatch");
  for (size_t i = 0; i < params.size(); ++i) {
    auto& dst = params[i].data;
    const auto& src = o.params[i].data;
    check(dst.size() == src.size(), "axpy: tensor size mismatch");
    for (size_t j = 0; j < dst.size(); ++j) dst[j] += a * src[j];
  }
}

void WeightVector::scale(double a) {
  for (auto& t : params) {
    for (auto& x : t.data) x *= a;
  }
}

double WeightVector::dot(const WeightVector& o) const {
  check(params.size() == o.params.size(), "dot: layout mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < params.size(); ++i) {
    const auto& a = params[i].data;
    const auto& b = o.params[i].data;
    for (size_t j = 0; j < a.size(); ++j) acc += a[j] * b[j];
  }
  return acc;
}

double WeightVector::norm() const { return std::sqrt(dot(*this)); }

std::vector<double> WeightVector::flatten() const {
  std::vector<double> out;
  out.reserve(flat_size());
  for (const auto& t : params) out.insert(out.end(), t.data.begin(), t.data.end());
  return out;
}

void WeightVector::unflatten(std::span<const double> flat) {
  check(flat.size() == flat_size(), "unflatten: size mismatch");
  size_t off = 0;
  for (auto& t : params) {
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(off),
              flat.begin() + static_cast<std::ptrdiff_t>(off + t.size()), t.data.begin());
    off += t.size();
  }
}

uint64_t WeightVector::checksum() const {
  uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const std::vector<double>& v) {
    uint64_t part = fnv1a64(v.data(), v.size() * sizeof(double));
    h ^= part;
    h *= 0x100000001b3ULL;
  };
  for (const auto& t : params) mix(t.data);
  for (const auto& s : bn) {
    mix(s.mean);
    mix(s.var);
  }
  return h;
}

WeightVector init_weights(const ModelSpec& spec, RngStream& rng) {
  spec.validate();
  WeightVector w;
  int layers = spec.num_layers();
  w.bn.resize(static_cast<size_t>(spec.hidden_count()));
  for (int l = 0; l < layers; ++l) {
    int fan_in = spec.layer_sizes[static_cast<size_t>(l)];
    int fan_out = spec.layer_sizes[static_cast<size_t>(l) + 1];
    double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::string base = "layer" + std::to_string(l);

    Tensor W;
    W.name = base + "/W";
    W.kind = ParamKind::kWeight;
    W.rows = static_cast<size_t>(fan_out);
    W.cols = static_cast<size_t>(fan_in);
    W.data.resize(W.rows * W.cols);
    for (auto& x : W.data) x = rng.next_uniform(-bound, bound);
    w.params.push_back(std::move(W));

    Tensor b;
    b.name = base + "/b";
    b.kind = ParamKind::kBias;
    b.rows = 1;
    b.cols = static_cast<size_t>(fan_out);
    b.data.assign(b.cols, 0.0);
    w.params.push_back(std::move(b));

    if (l < spec.hidden_count() && spec.layer_has_bn(l)) {
      Tensor gamma;
      gamma.name = base + "/gamma";
      gamma.kind = ParamKind::kBnScale;
      gamma.rows = 1;
      gamma.cols = static_cast<size_t>(fan_out);
      gamma.data.assign(gamma.cols, 1.0);
      w.params.push_back(std::move(gamma));

      Tensor beta;
      beta.name = base + "/beta";
      beta.kind = ParamKind::kBnShift;
      beta.rows = 1;
      beta.cols = static_cast<size_t>(fan_out);
      beta.data.assign(beta.cols, 0.0);
      w.params.push_back(std::move(beta));

      auto& stats = w.bn[static_cast<size_t>(l)];
      stats.mean.assign(static_cast<size_t>(fan_out), 0.0);
      stats.var.assign(static_cast<size_t>(fan_out), 1.0);
    }
  }
  return w;
}

Gradient zeros_like(const WeightVector& w) {
  Gradient g;
  g.params = w.params;
  for (auto& t : g.params) {
    for (auto& x : t.data) x = 0.0;
  }
  return g;
}

WeightVector average_weights(const std::vector<WeightVector>& models) {
  check(!models.empty(), "average_weights: need at least one model");
  for (const auto& m : models)
    check(m.same_layout(models.front()), "average_weights: layout mismatch across models");
  WeightVector out = models.front();
  const size_t w = models.size();
  if (w == 1) return out;
  // Coordinatewise mean over a sorted copy of the W values. Sorting makes the
  // reduction a function of the value multiset, so any reordering of the
  // input models produces the identical result; the all-equal shortcut makes
  // averaging W copies of a model an exact identity.
  std::vector<double> vals(w);
  for (size_t ti = 0; ti < out.params.size(); ++ti) {
    auto& dst = out.params[ti].data;
    for (size_t j = 0; j < dst.size(); ++j) {
      for (size_t m = 0; m < w; ++m) vals[m] = models[m].params[ti].data[j];
      std::sort(vals.begin(), vals.end());
      if (vals.front() == vals.back()) {
        dst[j] = vals.front();
        continue;
      }
      double acc = 0.0;
      for (double v : vals) acc += v;
      dst[j] = acc / static_cast<double>(w);
    }
  }
  return out;
}

}  // namespace swaplab
