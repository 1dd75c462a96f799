#include "ertinv/factorization.hpp"

#include <stdexcept>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace ertinv {

struct Factorization::Impl {
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
};

Factorization::Factorization(const SparseMatrix& A) : impl_(std::make_unique<Impl>()) {
  if (A.n_rows != A.n_cols) throw std::invalid_argument("sparse_factorize: matrix not square");
  n_ = A.n_rows;

  // A structurally empty row or column cannot be pivoted.
  std::vector<bool> col_seen(A.n_cols, false);
  for (std::size_t i = 0; i < A.n_rows; ++i) {
    bool row_seen = false;
    for (std::size_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k) {
      if (A.values[k] != 0.0) {
        row_seen = true;
        col_seen[A.column_indices[k]] = true;
      }
    }
    if (!row_seen) throw std::runtime_error("sparse_factorize: structurally singular (empty row)");
  }
  for (bool seen : col_seen)
    if (!seen) throw std::runtime_error("sparse_factorize: structurally singular (empty column)");

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(A.nnz());
  for (std::size_t i = 0; i < A.n_rows; ++i)
    for (std::size_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
      trip.emplace_back(static_cast<int>(i), static_cast<int>(A.column_indices[k]), A.values[k]);
  Eigen::SparseMatrix<double> M(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
  M.setFromTriplets(trip.begin(), trip.end());
  M.makeCompressed();

  impl_->lu.compute(M);
  if (impl_->lu.info() != Eigen::Success)
    throw std::runtime_error("sparse_factorize: numerically singular pivot");
}

Factorization::~Factorization() = default;
Factorization::Factorization(Factorization&&) noexcept = default;
Factorization& Factorization::operator=(Factorization&&) noexcept = default;

Vector Factorization::solve(std::span<const double> b) const {
  if (b.size() != n_) throw std::invalid_argument("Factorization::solve: dimension mismatch");
  Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(n_));
  Eigen::VectorXd x = impl_->lu.solve(rhs);
  if (impl_->lu.info() != Eigen::Success)
    throw std::runtime_error("Factorization::solve: solve failed");
  return Vector(x.data(), x.data() + n_);
}

Factorization sparse_factorize(const SparseMatrix& A) { return Factorization(A); }

}  // namespace ertinv
