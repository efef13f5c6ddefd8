// SPDX-License-Identifier: Apache-2.0
#include "swaplab/network.hpp"

#include <algorithm>
#include <cmath>

#include "swaplab/error.hpp"

namespace swaplab {

namespace {

// Index of layer l's weight tensor inside WeightVector::params. Layout per
// layer: W, b, then gamma, beta when the hidden layer has BN.
struct ParamIndex {
  std::vector<size_t> weight, bias, gamma, beta;
};

ParamIndex index_params(const ModelSpec& spec) {
  ParamIndex idx;
  size_t at = 0;
  for (int l = 0; l < spec.num_layers(); ++l) {
    idx.weight.push_back(at++);
    idx.bias.push_back(at++);
    if (l < spec.hidden_count() && spec.layer_has_bn(l)) {
      idx.gamma.push_back(at++);
      idx.beta.push_back(at++);
    } else {
      idx.gamma.push_back(SIZE_MAX);
      idx.beta.push_back(SIZE_MAX);
    }
  }
  return idx;
}

void affine(const Matrix& x, const Tensor& w, const Tensor& b, Matrix& out) {
  check(x.cols == w.cols, "forward: input width " + std::to_string(x.cols) +
                              " != fan-in of " + w.name);
  // Resize-in-place so persistent scratch matrices keep their capacity.
  out.rows = x.rows;
  out.cols = w.rows;
  out.data.resize(out.rows * out.cols);
  gemm_nt(x.rows, x.cols, w.rows, x.data.data(), w.data.data(), out.data.data());
  for (size_t i = 0; i < out.rows; ++i) {
    double* row = out.row(i);
    for (size_t j = 0; j < out.cols; ++j) row[j] += b.data[j];
  }
}

void apply_activation(Matrix& m, Activation act) {
  if (act == Activation::kRelu) {
    for (auto& v : m.data) v = v > 0.0 ? v : 0.0;
  } else {
    for (auto& v : m.data) v = std::tanh(v);
  }
}

void require_finite(const Matrix& m, const std::string& where) {
  if (!all_finite(m)) throw NumericError(where + ": non-finite value");
}

void colmean_var(const Matrix& z, std::vector<double>& mean, std::vector<double>& var) {
  size_t n = z.rows, d = z.cols;
  mean.assign(d, 0.0);
  var.assign(d, 0.0);
  for (size_t i = 0; i < n; ++i) {
    const double* row = z.row(i);
    for (size_t j = 0; j < d; ++j) mean[j] += row[j];
  }
  for (size_t j = 0; j < d; ++j) mean[j] /= static_cast<double>(n);
  for (size_t i = 0; i < n; ++i) {
    const double* row = z.row(i);
    for (size_t j = 0; j < d; ++j) {
      double c = row[j] - mean[j];
      var[j] += c * c;
    }
  }
  for (size_t j = 0; j < d; ++j) var[j] /= static_cast<double>(n);
}

}  // namespace

ForwardResult forward(const WeightVector& model, const ModelSpec& spec, const Batch& batch,
                      ForwardMode mode) {
  spec.validate();
  check(batch.size() >= 1, "forward: empty batch");
  check(batch.inputs.cols == static_cast<size_t>(spec.input_dim()),
        "forward: batch width != model input dim");
  check(batch.labels.size() == batch.size(), "forward: label count != batch size");
  if (mode == ForwardMode::kTrain && spec.has_batchnorm())
    check(batch.size() >= 2, "forward: train-mode batch norm needs batch size >= 2 "
                             "(variance of a single sample is degenerate)");

  ParamIndex idx = index_params(spec);
  ForwardResult r;
  r.cache.mode = mode;
  int layers = spec.num_layers();
  r.cache.bn_xhat.resize(static_cast<size_t>(spec.hidden_count()));
  r.cache.bn_inv_s.resize(static_cast<size_t>(spec.hidden_count()));

  r.cache.layer_inputs.reserve(static_cast<size_t>(layers));
  r.cache.layer_inputs.push_back(batch.inputs);
  for (int l = 0; l < layers; ++l) {
    const Matrix& x = r.cache.layer_inputs.back();
    const std::string where = "layer" + std::to_string(l) + "/affine";
    Matrix z;
    affine(x, model.params[idx.weight[static_cast<size_t>(l)]],
           model.params[idx.bias[static_cast<size_t>(l)]], z);
    require_finite(z, where);

    if (l == layers - 1) {
      r.logits = std::move(z);
      break;
    }

    if (spec.layer_has_bn(l)) {
      const auto& gamma = model.params[idx.gamma[static_cast<size_t>(l)]].data;
      const auto& beta = model.params[idx.beta[static_cast<size_t>(l)]].data;
      size_t d = z.cols;
      std::vector<double> mean, var;
      if (mode == ForwardMode::kTrain) {
        colmean_var(z, mean, var);
      } else {
        const auto& stats = model.bn[static_cast<size_t>(l)];
        check(!stats.empty(), "forward: missing running stats for BN layer " + std::to_string(l));
        mean = stats.mean;
        var = stats.var;
      }
      std::vector<double> inv_s(d);
      for (size_t j = 0; j < d; ++j) inv_s[j] = 1.0 / std::sqrt(var[j] + kBnEpsilon);

      Matrix xhat(z.rows, d);
      for (size_t i = 0; i < z.rows; ++i) {
        const double* zr = z.row(i);
        double* xr = xhat.row(i);
        for (size_t j = 0; j < d; ++j) xr[j] = (zr[j] - mean[j]) * inv_s[j];
      }
      for (size_t i = 0; i < z.rows; ++i) {
        double* zr = z.row(i);
        const double* xr = xhat.row(i);
        for (size_t j = 0; j < d; ++j) zr[j] = gamma[j] * xr[j] + beta[j];
      }
      if (mode == ForwardMode::kTrain) {
        r.cache.bn_xhat[static_cast<size_t>(l)] = std::move(xhat);
        r.cache.bn_inv_s[static_cast<size_t>(l)] = std::move(inv_s);
      }
    }

    apply_activation(z, spec.activation);
    r.cache.layer_inputs.push_back(std::move(z));
  }
  return r;
}

double mean_cross_entropy(const Matrix& logits, const std::vector<int>& labels) {
  check(logits.rows == labels.size(), "cross_entropy: row/label mismatch");
  double total = 0.0;
  for (size_t i = 0; i < logits.rows; ++i) {
    const double* row = logits.row(i);
    double mx = row[0];
    for (size_t j = 1; j < logits.cols; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (size_t j = 0; j < logits.cols; ++j) sum += std::exp(row[j] - mx);
    double lse = std::log(sum) + mx;
    total += lse - row[static_cast<size_t>(labels[i])];
  }
  return total / static_cast<double>(logits.rows);
}

double loss_value(const WeightVector& model, const ModelSpec& spec, const Batch& batch) {
  ForwardResult r = forward(model, spec, batch, ForwardMode::kTrain);
  return mean_cross_entropy(r.logits, batch.labels);
}

LossGrad loss_and_grad(const WeightVector& model, const ModelSpec& spec, const Batch& batch,
                       double* train_acc_out) {
  ForwardResult fw = forward(model, spec, batch, ForwardMode::kTrain);
  const ForwardCache& cache = fw.cache;
  ParamIndex idx = index_params(spec);
  size_t n = batch.size();

  LossGrad out;
  out.loss = mean_cross_entropy(fw.logits, batch.labels);
  if (!std::isfinite(out.loss)) throw NumericError("loss: non-finite value");
  out.grad = zeros_like(model);

  if (train_acc_out) {
    size_t correct = 0;
    for (size_t i = 0; i < n; ++i) {
      const double* row = fw.logits.row(i);
      size_t best = 0;
      for (size_t j = 1; j < fw.logits.cols; ++j) {
        if (row[j] > row[best]) best = j;
      }
      if (static_cast<int>(best) == batch.labels[i]) ++correct;
    }
    *train_acc_out = static_cast<double>(correct) / static_cast<double>(n);
  }

  // d(mean CE)/dlogits = (softmax - onehot) / n
  Matrix delta(fw.logits.rows, fw.logits.cols);
  for (size_t i = 0; i < n; ++i) {
    const double* row = fw.logits.row(i);
    double* dr = delta.row(i);
    double mx = row[0];
    for (size_t j = 1; j < fw.logits.cols; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (size_t j = 0; j < fw.logits.cols; ++j) {
      dr[j] = std::exp(row[j] - mx);
      sum += dr[j];
    }
    for (size_t j = 0; j < fw.logits.cols; ++j) dr[j] /= sum;
    dr[static_cast<size_t>(batch.labels[i])] -= 1.0;
    for (size_t j = 0; j < fw.logits.cols; ++j) dr[j] /= static_cast<double>(n);
  }

  for (int l = spec.num_layers() - 1; l >= 0; --l) {
    const Matrix& x = cache.layer_inputs[static_cast<size_t>(l)];
    const Tensor& w = model.params[idx.weight[static_cast<size_t>(l)]];

    // Activation and BN backward (hidden layers only; delta currently holds
    // the gradient at this layer's output).
    if (l < spec.num_layers() - 1) {
      const Matrix& act_out = cache.layer_inputs[static_cast<size_t>(l) + 1];
      if (spec.activation == Activation::kRelu) {
        for (size_t i = 0; i < delta.size(); ++i)
          delta.data[i] = act_out.data[i] > 0.0 ? delta.data[i] : 0.0;
      } else {
        for (size_t i = 0; i < delta.size(); ++i) {
          double t = act_out.data[i];
          delta.data[i] *= 1.0 - t * t;
        }
      }

      if (spec.layer_has_bn(l)) {
        const Matrix& xhat = cache.bn_xhat[static_cast<size_t>(l)];
        const auto& inv_s = cache.bn_inv_s[static_cast<size_t>(l)];
        const auto& gamma = model.params[idx.gamma[static_cast<size_t>(l)]].data;
        size_t d = delta.cols;

        auto& dgamma = out.grad.params[idx.gamma[static_cast<size_t>(l)]].data;
        auto& dbeta = out.grad.params[idx.beta[static_cast<size_t>(l)]].data;
        std::vector<double> sum_dxhat(d, 0.0), sum_dxhat_xhat(d, 0.0);
        for (size_t i = 0; i < delta.rows; ++i) {
          const double* dr = delta.row(i);
          const double* xr = xhat.row(i);
          for (size_t j = 0; j < d; ++j) {
            dgamma[j] += dr[j] * xr[j];
            dbeta[j] += dr[j];
            double dxhat = dr[j] * gamma[j];
            sum_dxhat[j] += dxhat;
            sum_dxhat_xhat[j] += dxhat * xr[j];
          }
        }
        double inv_n = 1.0 / static_cast<double>(delta.rows);
        for (size_t i = 0; i < delta.rows; ++i) {
          double* dr = delta.row(i);
          const double* xr = xhat.row(i);
          for (size_t j = 0; j < d; ++j) {
            double dxhat = dr[j] * gamma[j];
            dr[j] = inv_s[j] * (dxhat - inv_n * sum_dxhat[j] - xr[j] * inv_n * sum_dxhat_xhat[j]);
          }
        }
      }
    }

    // Affine backward: dW += delta^T x, db += colsum(delta), dX = delta W.
    {
      auto& gw = out.grad.params[idx.weight[static_cast<size_t>(l)]].data;
      gemm_tn_acc(delta.rows, delta.cols, x.cols, delta.data.data(), x.data.data(), gw.data());
      auto& gb = out.grad.params[idx.bias[static_cast<size_t>(l)]].data;
      for (size_t i = 0; i < delta.rows; ++i) {
        const double* dr = delta.row(i);
        for (size_t j = 0; j < delta.cols; ++j) gb[j] += dr[j];
      }
      if (l > 0) {
        Matrix dx(delta.rows, w.cols);
        gemm_nn(delta.rows, delta.cols, w.cols, delta.data.data(), w.data.data(),
                dx.data.data());
        if (!all_finite(dx))
          throw NumericError("layer" + std::to_string(l) + "/backward: non-finite value");
        delta = std::move(dx);
      }
    }
  }
  return out;
}

WeightVector recompute_bn_stats(const WeightVector& model, const ModelSpec& spec,
                                const Dataset& data) {
  check(data.size() >= 1, "recompute_bn_stats: empty dataset");
  if (!spec.has_batchnorm()) return model;

  ParamIndex idx = index_params(spec);
  WeightVector out = model;

  // Full-dataset activations are sizable; per-thread scratch keeps repeated
  // recomputations (one per evaluation) from churning large allocations.
  thread_local Matrix x, z;
  x.rows = data.features.rows;
  x.cols = data.features.cols;
  x.data.assign(data.features.data.begin(), data.features.data.end());
  for (int l = 0; l < spec.hidden_count(); ++l) {
    affine(x, model.params[idx.weight[static_cast<size_t>(l)]],
           model.params[idx.bias[static_cast<size_t>(l)]], z);

    if (spec.layer_has_bn(l)) {
      auto& stats = out.bn[static_cast<size_t>(l)];
      colmean_var(z, stats.mean, stats.var);
      for (auto& v : stats.var) v = std::max(v, kBnEpsilon);  // strict positivity floor

      const auto& gamma = model.params[idx.gamma[static_cast<size_t>(l)]].data;
      const auto& beta = model.params[idx.beta[static_cast<size_t>(l)]].data;
      for (size_t i = 0; i < z.rows; ++i) {
        double* zr = z.row(i);
        for (size_t j = 0; j < z.cols; ++j) {
          double xhat = (zr[j] - stats.mean[j]) / std::sqrt(stats.var[j] + kBnEpsilon);
          zr[j] = gamma[j] * xhat + beta[j];
        }
      }
    }
    apply_activation(z, spec.activation);
    std::swap(x, z);
  }
  return out;
}

EvalResult evaluate(const WeightVector& model, const ModelSpec& spec, const Dataset& data) {
  check(data.size() >= 1, "evaluate: empty dataset");
  constexpr size_t kChunk = 256;  // keeps per-chunk buffers in the small-allocation regime
  size_t n = data.size();
  size_t correct = 0;
  double loss_sum = 0.0;
  std::vector<int> order;  // identity; evaluation never shuffles

  for (size_t begin = 0; begin < n; begin += kChunk) {
    size_t end = std::min(begin + kChunk, n);
    std::vector<int> chunk_idx(end - begin);
    for (size_t i = begin; i < end; ++i) chunk_idx[i - begin] = static_cast<int>(i);
    Batch b = gather(data, chunk_idx);
    ForwardResult r = forward(model, spec, b, ForwardMode::kEval);
    for (size_t i = 0; i < r.logits.rows; ++i) {
      const double* row = r.logits.row(i);
      size_t best = 0;
      for (size_t j = 1; j < r.logits.cols; ++j) {
        if (row[j] > row[best]) best = j;  // strict: ties keep the lowest index
      }
      if (static_cast<int>(best) == b.labels[i]) ++correct;
    }
    loss_sum += mean_cross_entropy(r.logits, b.labels) * static_cast<double>(r.logits.rows);
  }
  EvalResult res;
  res.accuracy = static_cast<double>(correct) / static_cast<double>(n);
  res.mean_loss = loss_sum / static_cast<double>(n);
  return res;
}

}  // namespace swaplab
