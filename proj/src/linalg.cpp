#include "ertinv/linalg.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace ertinv {

double dot(std::span<const double> x, std::span<const double> y) {
  assert(x.size() == y.size());
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void scale(double alpha, std::span<double> x) {
  for (double& v : x) v *= alpha;
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix I(n, n);
  for (std::size_t i = 0; i < n; ++i) I(i, i) = 1.0;
  return I;
}

Vector matvec(const DenseMatrix& A, std::span<const double> x) {
  if (x.size() != A.n_cols) throw std::invalid_argument("matvec: dimension mismatch");
  Vector y(A.n_rows, 0.0);
  for (std::size_t i = 0; i < A.n_rows; ++i) {
    const double* row = &A.values[i * A.n_cols];
    double s = 0.0;
    for (std::size_t j = 0; j < A.n_cols; ++j) s += row[j] * x[j];
    y[i] = s;
  }
  return y;
}

Vector matvec_transpose(const DenseMatrix& A, std::span<const double> x) {
  if (x.size() != A.n_rows) throw std::invalid_argument("matvec_transpose: dimension mismatch");
  Vector y(A.n_cols, 0.0);
  for (std::size_t i = 0; i < A.n_rows; ++i) {
    const double* row = &A.values[i * A.n_cols];
    const double xi = x[i];
    for (std::size_t j = 0; j < A.n_cols; ++j) y[j] += row[j] * xi;
  }
  return y;
}

DenseMatrix matmul(const DenseMatrix& A, const DenseMatrix& B) {
  if (A.n_cols != B.n_rows) throw std::invalid_argument("matmul: dimension mismatch");
  DenseMatrix C(A.n_rows, B.n_cols);
  // i-k-j loop order keeps the inner loop contiguous in B and C.
  for (std::size_t i = 0; i < A.n_rows; ++i) {
    double* crow = &C.values[i * C.n_cols];
    for (std::size_t k = 0; k < A.n_cols; ++k) {
      const double aik = A(i, k);
      if (aik == 0.0) continue;
      const double* brow = &B.values[k * B.n_cols];
      for (std::size_t j = 0; j < B.n_cols; ++j) crow[j] += aik * brow[j];
    }
  }
  return C;
}

DenseMatrix matmul_transposed_left(const DenseMatrix& A, const DenseMatrix& B) {
  if (A.n_rows != B.n_rows) throw std::invalid_argument("matmul_transposed_left: dimension mismatch");
  DenseMatrix C(A.n_cols, B.n_cols);
  for (std::size_t k = 0; k < A.n_rows; ++k) {
    const double* arow = &A.values[k * A.n_cols];
    const double* brow = &B.values[k * B.n_cols];
    for (std::size_t i = 0; i < A.n_cols; ++i) {
      const double aki = arow[i];
      if (aki == 0.0) continue;
      double* crow = &C.values[i * C.n_cols];
      for (std::size_t j = 0; j < B.n_cols; ++j) crow[j] += aki * brow[j];
    }
  }
  return C;
}

DenseMatrix dense_cholesky(const DenseMatrix& C) {
  if (C.n_rows != C.n_cols) throw std::invalid_argument("dense_cholesky: matrix not square");
  const std::size_t n = C.n_rows;
  DenseMatrix L(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = C(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
    if (!(d > 0.0)) throw std::runtime_error("dense_cholesky: matrix not positive definite");
    const double ljj = std::sqrt(d);
    L(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = C(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      L(i, j) = s / ljj;
    }
  }
  return L;
}

void cholesky_solve_in_place(const DenseMatrix& L, std::span<double> x) {
  const std::size_t n = L.n_rows;
  if (x.size() != n) throw std::invalid_argument("cholesky_solve: dimension mismatch");
  // forward substitution L y = b
  for (std::size_t i = 0; i < n; ++i) {
    double s = x[i];
    const double* row = &L.values[i * n];
    for (std::size_t k = 0; k < i; ++k) s -= row[k] * x[k];
    x[i] = s / row[i];
  }
  // back substitution L^T x = y
  for (std::size_t ii = n; ii-- > 0;) {
    double s = x[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= L(k, ii) * x[k];
    x[ii] = s / L(ii, ii);
  }
}

Vector cholesky_solve(const DenseMatrix& L, std::span<const double> b) {
  Vector x(b.begin(), b.end());
  cholesky_solve_in_place(L, x);
  return x;
}

}  // namespace ertinv
