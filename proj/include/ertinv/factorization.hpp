#pragma once

#include <memory>

#include "ertinv/sparse.hpp"

namespace ertinv {

/// Reusable sparse LU factorization of a square, structurally nonsingular
/// matrix. Handles the symmetric indefinite saddle matrices arising here;
/// solves on a shared factorization are safe from multiple threads.
class Factorization {
 public:
  explicit Factorization(const SparseMatrix& A);
  ~Factorization();
  Factorization(Factorization&&) noexcept;
  Factorization& operator=(Factorization&&) noexcept;
  Factorization(const Factorization&) = delete;
  Factorization& operator=(const Factorization&) = delete;

  std::size_t size() const { return n_; }
  Vector solve(std::span<const double> b) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::size_t n_ = 0;
};

Factorization sparse_factorize(const SparseMatrix& A);

}  // namespace ertinv
