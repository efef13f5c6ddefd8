// SPDX-License-Identifier: Apache-2.0
#include "swaplab/matrix.hpp"

#include <cmath>

#include "swaplab/error.hpp"

namespace swaplab {

void gemm_nt(size_t n, size_t k, size_t m, const double* a, const double* b, double* out) {
  for (size_t i = 0; i < n; ++i) {
    const double* ai = a + i * k;
    double* oi = out + i * m;
    for (size_t j = 0; j < m; ++j) {
      const double* bj = b + j * k;
      double acc = 0.0;
      for (size_t t = 0; t < k; ++t) acc += ai[t] * bj[t];
      oi[j] = acc;
    }
  }
}

void gemm_tn_acc(size_t n, size_t m, size_t k, const double* a, const double* b, double* out) {
  for (size_t i = 0; i < n; ++i) {
    const double* ai = a + i * m;
    const double* bi = b + i * k;
    for (size_t r = 0; r < m; ++r) {
      double av = ai[r];
      if (av == 0.0) continue;
      double* orow = out + r * k;
      for (size_t c = 0; c < k; ++c) orow[c] += av * bi[c];
    }
  }
}

void gemm_nn(size_t n, size_t m, size_t k, const double* a, const double* b, double* out) {
  for (size_t i = 0; i < n * k; ++i) out[i] = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double* ai = a + i * m;
    double* oi = out + i * k;
    for (size_t t = 0; t < m; ++t) {
      double av = ai[t];
      if (av == 0.0) continue;
      const double* bt = b + t * k;
      for (size_t j = 0; j < k; ++j) oi[j] += av * bt[j];
    }
  }
}

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out) {
  check(a.cols == b.cols, "matmul_nt: inner dimensions differ");
  out = Matrix(a.rows, b.rows);
  gemm_nt(a.rows, a.cols, b.rows, a.data.data(), b.data.data(), out.data.data());
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out) {
  check(a.rows == b.rows, "matmul_tn: inner dimensions differ");
  out = Matrix(a.cols, b.cols);
  gemm_tn_acc(a.rows, a.cols, b.cols, a.data.data(), b.data.data(), out.data.data());
}

void matmul_nn(const Matrix& a, const Matrix& b, Matrix& out) {
  check(a.cols == b.rows, "matmul_nn: inner dimensions differ");
  out = Matrix(a.rows, b.cols);
  gemm_nn(a.rows, a.cols, b.cols, a.data.data(), b.data.data(), out.data.data());
}

bool all_finite(const Matrix& m) {
  for (double v : m.data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace swaplab
