#include "ertinv/spectral.hpp"

#include <stdexcept>

#include <Eigen/Dense>

namespace ertinv {

DenseMatrix dense_saddle_matrix(const SparseMatrix& Q, const SparseMatrix& D,
                                const DenseMatrix& J, double beta) {
  const std::size_t K = Q.n_rows;
  const std::size_t N = D.n_rows;
  if (D.n_cols != K || (J.n_rows > 0 && J.n_cols != N))
    throw std::invalid_argument("dense_saddle_matrix: shape mismatch");

  DenseMatrix A(K + N, K + N);
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t k = Q.row_offsets[i]; k < Q.row_offsets[i + 1]; ++k)
      A(i, Q.column_indices[k]) += Q.values[k];
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t k = D.row_offsets[i]; k < D.row_offsets[i + 1]; ++k) {
      A(K + i, D.column_indices[k]) += D.values[k];
      A(D.column_indices[k], K + i) += D.values[k];
    }
  }
  if (J.n_rows > 0) {
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) {
        double s = 0.0;
        for (std::size_t r = 0; r < J.n_rows; ++r) s += J(r, i) * J(r, j);
        A(K + i, K + j) -= s / beta;
      }
  }
  return A;
}

DenseMatrix dense_ideal_preconditioner(const SparseMatrix& Q, const SparseMatrix& D,
                                       const DenseMatrix& J, double beta) {
  const std::size_t K = Q.n_rows;
  const std::size_t N = D.n_rows;
  if (D.n_cols != K || (J.n_rows > 0 && J.n_cols != N))
    throw std::invalid_argument("dense_ideal_preconditioner: shape mismatch");

  const DenseMatrix Lq = dense_cholesky(to_dense(Q));
  const DenseMatrix Dt = to_dense(transpose(D));  // K x N

  // S = D Q^-1 D^T, column by column through the Cholesky factor.
  DenseMatrix X(K, N);
  Vector col(K);
  for (std::size_t j = 0; j < N; ++j) {
    for (std::size_t i = 0; i < K; ++i) col[i] = Dt(i, j);
    cholesky_solve_in_place(Lq, col);
    for (std::size_t i = 0; i < K; ++i) X(i, j) = col[i];
  }

  DenseMatrix P(K + N, K + N);
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t k = Q.row_offsets[i]; k < Q.row_offsets[i + 1]; ++k)
      P(i, Q.column_indices[k]) += Q.values[k];
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < N; ++j) {
      double s = 0.0;
      for (std::size_t k = D.row_offsets[i]; k < D.row_offsets[i + 1]; ++k)
        s += D.values[k] * X(D.column_indices[k], j);
      for (std::size_t r = 0; r < J.n_rows; ++r) s += J(r, i) * J(r, j) / beta;
      P(K + i, K + j) = s;
    }
  }
  // Symmetrize away the round-off of the triangular solves.
  for (std::size_t i = K; i < K + N; ++i)
    for (std::size_t j = i + 1; j < K + N; ++j) {
      const double v = 0.5 * (P(i, j) + P(j, i));
      P(i, j) = v;
      P(j, i) = v;
    }
  return P;
}

std::vector<double> preconditioned_eigenvalues(const DenseMatrix& A, const DenseMatrix& P) {
  if (A.n_rows != A.n_cols || P.n_rows != P.n_cols || A.n_rows != P.n_rows)
    throw std::invalid_argument("preconditioned_eigenvalues: shape mismatch");
  const std::size_t n = A.n_rows;
  const DenseMatrix L = dense_cholesky(P);

  // B = L^-1 A L^-T; B is symmetric and similar to P^-1 A.
  DenseMatrix Y(n, n);
  Vector col(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) col[i] = A(i, j);  // A column = A row
    // forward substitution only: Y(:, j) = L^-1 A(:, j)
    for (std::size_t i = 0; i < n; ++i) {
      double s = col[i];
      for (std::size_t k = 0; k < i; ++k) s -= L(i, k) * col[k];
      col[i] = s / L(i, i);
    }
    for (std::size_t i = 0; i < n; ++i) Y(i, j) = col[i];
  }
  Eigen::MatrixXd B(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < n; ++r) col[r] = Y(i, r);  // row i of Y
    for (std::size_t r = 0; r < n; ++r) {
      double s = col[r];
      for (std::size_t k = 0; k < r; ++k) s -= L(r, k) * col[k];
      col[r] = s / L(r, r);
    }
    for (std::size_t r = 0; r < n; ++r) B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r)) = col[r];
  }
  Eigen::MatrixXd Bs = 0.5 * (B + B.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(Bs, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("preconditioned_eigenvalues: eigensolver failed");
  const auto& ev = solver.eigenvalues();
  return std::vector<double>(ev.data(), ev.data() + n);
}

}  // namespace ertinv
