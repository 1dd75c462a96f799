#pragma once

#include <cstddef>
#include <span>
#include <tuple>
#include <vector>

#include "ertinv/linalg.hpp"

namespace ertinv {

/// Compressed-row sparse matrix. Column indices are strictly increasing
/// within each row; duplicate triplets are summed on construction.
struct SparseMatrix {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<std::size_t> row_offsets;    // length n_rows + 1
  std::vector<std::size_t> column_indices; // length nnz
  std::vector<double> values;              // length nnz

  std::size_t nnz() const { return values.size(); }

  /// Entry lookup by binary search; zero if not stored.
  double coeff(std::size_t i, std::size_t j) const;
};

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

SparseMatrix from_triplets(std::size_t n_rows, std::size_t n_cols,
                           std::vector<Triplet> triplets);

SparseMatrix sparse_identity(std::size_t n);

/// y = A x
Vector spmv(const SparseMatrix& A, std::span<const double> x);
/// y += alpha * A x
void spmv_add(const SparseMatrix& A, std::span<const double> x, double alpha,
              std::span<double> y);
/// y = A^T x without forming the transpose
Vector spmv_transpose(const SparseMatrix& A, std::span<const double> x);

SparseMatrix transpose(const SparseMatrix& A);

/// C = A B (classic row-by-row CSR product with a dense accumulator)
SparseMatrix sparse_matmul(const SparseMatrix& A, const SparseMatrix& B);

/// Returns A with row i scaled by s[i].
SparseMatrix scale_rows(const SparseMatrix& A, std::span<const double> s);

std::vector<double> diagonal(const SparseMatrix& A);

/// max_ij |A_ij - A_ji| over the stored pattern.
double symmetry_error(const SparseMatrix& A);

DenseMatrix to_dense(const SparseMatrix& A);

}  // namespace ertinv
