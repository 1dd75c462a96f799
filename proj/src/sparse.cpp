#include "ertinv/sparse.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ertinv {

double SparseMatrix::coeff(std::size_t i, std::size_t j) const {
  const auto begin = column_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[i]);
  const auto end = column_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[i + 1]);
  const auto it = std::lower_bound(begin, end, j);
  if (it == end || *it != j) return 0.0;
  return values[static_cast<std::size_t>(it - column_indices.begin())];
}

SparseMatrix from_triplets(std::size_t n_rows, std::size_t n_cols,
                           std::vector<Triplet> triplets) {
  for (const Triplet& t : triplets) {
    if (t.row >= n_rows || t.col >= n_cols)
      throw std::invalid_argument("from_triplets: index out of range");
  }
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return std::tie(a.row, a.col) < std::tie(b.row, b.col);
  });

  SparseMatrix A;
  A.n_rows = n_rows;
  A.n_cols = n_cols;
  A.row_offsets.assign(n_rows + 1, 0);
  A.column_indices.reserve(triplets.size());
  A.values.reserve(triplets.size());

  for (std::size_t k = 0; k < triplets.size();) {
    const std::size_t r = triplets[k].row;
    const std::size_t c = triplets[k].col;
    double v = 0.0;
    while (k < triplets.size() && triplets[k].row == r && triplets[k].col == c) {
      v += triplets[k].value;
      ++k;
    }
    A.column_indices.push_back(c);
    A.values.push_back(v);
    A.row_offsets[r + 1] = A.column_indices.size();
  }
  for (std::size_t r = 0; r < n_rows; ++r)
    A.row_offsets[r + 1] = std::max(A.row_offsets[r + 1], A.row_offsets[r]);
  return A;
}

SparseMatrix sparse_identity(std::size_t n) {
  SparseMatrix I;
  I.n_rows = I.n_cols = n;
  I.row_offsets.resize(n + 1);
  I.column_indices.resize(n);
  I.values.assign(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    I.row_offsets[i] = i;
    I.column_indices[i] = i;
  }
  I.row_offsets[n] = n;
  return I;
}

Vector spmv(const SparseMatrix& A, std::span<const double> x) {
  Vector y(A.n_rows, 0.0);
  spmv_add(A, x, 1.0, y);
  return y;
}

void spmv_add(const SparseMatrix& A, std::span<const double> x, double alpha,
              std::span<double> y) {
  if (x.size() != A.n_cols || y.size() != A.n_rows)
    throw std::invalid_argument("spmv: dimension mismatch");
  for (std::size_t i = 0; i < A.n_rows; ++i) {
    double s = 0.0;
    for (std::size_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
      s += A.values[k] * x[A.column_indices[k]];
    y[i] += alpha * s;
  }
}

Vector spmv_transpose(const SparseMatrix& A, std::span<const double> x) {
  if (x.size() != A.n_rows) throw std::invalid_argument("spmv_transpose: dimension mismatch");
  Vector y(A.n_cols, 0.0);
  for (std::size_t i = 0; i < A.n_rows; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    for (std::size_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
      y[A.column_indices[k]] += A.values[k] * xi;
  }
  return y;
}

SparseMatrix transpose(const SparseMatrix& A) {
  SparseMatrix T;
  T.n_rows = A.n_cols;
  T.n_cols = A.n_rows;
  T.row_offsets.assign(A.n_cols + 1, 0);
  for (std::size_t c : A.column_indices) ++T.row_offsets[c + 1];
  for (std::size_t r = 0; r < T.n_rows; ++r) T.row_offsets[r + 1] += T.row_offsets[r];
  T.column_indices.resize(A.nnz());
  T.values.resize(A.nnz());
  std::vector<std::size_t> fill(T.n_rows, 0);
  for (std::size_t i = 0; i < A.n_rows; ++i) {
    for (std::size_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k) {
      const std::size_t c = A.column_indices[k];
      const std::size_t pos = T.row_offsets[c] + fill[c]++;
      T.column_indices[pos] = i;  // rows of A visited in order -> sorted
      T.values[pos] = A.values[k];
    }
  }
  return T;
}

SparseMatrix sparse_matmul(const SparseMatrix& A, const SparseMatrix& B) {
  if (A.n_cols != B.n_rows) throw std::invalid_argument("sparse_matmul: dimension mismatch");
  SparseMatrix C;
  C.n_rows = A.n_rows;
  C.n_cols = B.n_cols;
  C.row_offsets.assign(A.n_rows + 1, 0);

  std::vector<double> accum(B.n_cols, 0.0);
  constexpr std::size_t kUnmarked = static_cast<std::size_t>(-1);
  std::vector<std::size_t> mark(B.n_cols, kUnmarked);
  std::vector<std::size_t> marked;
  marked.reserve(64);

  for (std::size_t i = 0; i < A.n_rows; ++i) {
    marked.clear();
    for (std::size_t ka = A.row_offsets[i]; ka < A.row_offsets[i + 1]; ++ka) {
      const std::size_t j = A.column_indices[ka];
      const double aij = A.values[ka];
      for (std::size_t kb = B.row_offsets[j]; kb < B.row_offsets[j + 1]; ++kb) {
        const std::size_t c = B.column_indices[kb];
        if (mark[c] != i) {
          mark[c] = i;
          accum[c] = 0.0;
          marked.push_back(c);
        }
        accum[c] += aij * B.values[kb];
      }
    }
    std::sort(marked.begin(), marked.end());
    for (std::size_t c : marked) {
      C.column_indices.push_back(c);
      C.values.push_back(accum[c]);
    }
    C.row_offsets[i + 1] = C.column_indices.size();
  }
  return C;
}

SparseMatrix scale_rows(const SparseMatrix& A, std::span<const double> s) {
  if (s.size() != A.n_rows) throw std::invalid_argument("scale_rows: dimension mismatch");
  SparseMatrix B = A;
  for (std::size_t i = 0; i < A.n_rows; ++i)
    for (std::size_t k = B.row_offsets[i]; k < B.row_offsets[i + 1]; ++k)
      B.values[k] *= s[i];
  return B;
}

std::vector<double> diagonal(const SparseMatrix& A) {
  const std::size_t n = std::min(A.n_rows, A.n_cols);
  std::vector<double> d(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) d[i] = A.coeff(i, i);
  return d;
}

double symmetry_error(const SparseMatrix& A) {
  if (A.n_rows != A.n_cols) return std::numeric_limits<double>::infinity();
  double err = 0.0;
  for (std::size_t i = 0; i < A.n_rows; ++i)
    for (std::size_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
      err = std::max(err, std::abs(A.values[k] - A.coeff(A.column_indices[k], i)));
  return err;
}

DenseMatrix to_dense(const SparseMatrix& A) {
  DenseMatrix D(A.n_rows, A.n_cols);
  for (std::size_t i = 0; i < A.n_rows; ++i)
    for (std::size_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
      D(i, A.column_indices[k]) += A.values[k];
  return D;
}

}  // namespace ertinv
