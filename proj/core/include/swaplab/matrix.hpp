// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

namespace swaplab {

/// Dense row-major matrix of doubles. All training math is 64-bit.
struct Matrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(size_t r, size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(size_t i, size_t j) { return data[i * cols + j]; }
  double operator()(size_t i, size_t j) const { return data[i * cols + j]; }
  double* row(size_t i) { return data.data() + i * cols; }
  const double* row(size_t i) const { return data.data() + i * cols; }
  size_t size() const { return data.size(); }

  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

/// out[n x m] = a[n x k] * b[m x k]^T   (out must be preallocated, is overwritten)
void gemm_nt(size_t n, size_t k, size_t m, const double* a, const double* b, double* out);
/// out[m x k] += a[n x m]^T * b[n x k]
void gemm_tn_acc(size_t n, size_t m, size_t k, const double* a, const double* b, double* out);
/// out[n x k] = a[n x m] * b[m x k]
void gemm_nn(size_t n, size_t m, size_t k, const double* a, const double* b, double* out);

/// out = a * b^T
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out);
/// out = a^T * b
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out);
/// out = a * b
void matmul_nn(const Matrix& a, const Matrix& b, Matrix& out);

bool all_finite(const Matrix& m);

}  // namespace swaplab
