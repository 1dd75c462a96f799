#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Dense kernels and small-vector helpers shared across the solver stack.

namespace ertinv {

using Vector = std::vector<double>;

double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);

// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(double alpha, std::span<double> x);

/// Row-major dense matrix.
struct DenseMatrix {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<double> values;  // n_rows * n_cols

  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols)
      : n_rows(rows), n_cols(cols), values(rows * cols, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return values[i * n_cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values[i * n_cols + j]; }

  static DenseMatrix identity(std::size_t n);
};

Vector matvec(const DenseMatrix& A, std::span<const double> x);
Vector matvec_transpose(const DenseMatrix& A, std::span<const double> x);

// C = A * B
DenseMatrix matmul(const DenseMatrix& A, const DenseMatrix& B);
// C = A^T * A scaled; helper for normal-equation style products
DenseMatrix matmul_transposed_left(const DenseMatrix& A, const DenseMatrix& B);

/// Lower Cholesky factor of a symmetric positive definite matrix.
/// Throws std::runtime_error on a non-positive pivot.
DenseMatrix dense_cholesky(const DenseMatrix& C);

/// Solves L L^T x = b given the lower factor L.
Vector cholesky_solve(const DenseMatrix& L, std::span<const double> b);
void cholesky_solve_in_place(const DenseMatrix& L, std::span<double> x);

}  // namespace ertinv
