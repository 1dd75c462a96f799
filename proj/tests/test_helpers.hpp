#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "ertinv/linalg.hpp"
#include "ertinv/mesh.hpp"
#include "ertinv/sparse.hpp"

namespace test_helpers {

/// n x n structured triangulation of the unit square; the bottom edge lies on
/// {z = 0} and is tagged SURFACE by construction.
inline ertinv::Mesh make_unit_square_mesh(std::size_t n) {
  std::vector<std::array<double, 2>> vertices;
  for (std::size_t j = 0; j <= n; ++j)
    for (std::size_t i = 0; i <= n; ++i)
      vertices.push_back({static_cast<double>(i) / static_cast<double>(n),
                          static_cast<double>(j) / static_cast<double>(n)});
  const auto id = [n](std::size_t i, std::size_t j) { return j * (n + 1) + i; };
  std::vector<std::array<std::size_t, 3>> cells;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      cells.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return ertinv::finalize_mesh(std::move(vertices), std::move(cells), {});
}

/// Independent dense solve oracle: Gaussian elimination with partial pivoting.
inline ertinv::Vector dense_lu_solve(ertinv::DenseMatrix A, ertinv::Vector b) {
  const std::size_t n = A.n_rows;
  if (A.n_cols != n || b.size() != n) throw std::invalid_argument("dense_lu_solve: shape");
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(A(i, k)) > std::abs(A(piv, k))) piv = i;
    if (A(piv, k) == 0.0) throw std::runtime_error("dense_lu_solve: singular");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(A(k, j), A(piv, j));
      std::swap(b[k], b[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = A(i, k) / A(k, k);
      if (f == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) A(i, j) -= f * A(k, j);
      b[i] -= f * b[k];
    }
  }
  ertinv::Vector x(n, 0.0);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= A(ii, j) * x[j];
    x[ii] = s / A(ii, ii);
  }
  return x;
}

inline ertinv::Vector random_vector(std::size_t n, std::mt19937& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ertinv::Vector v(n);
  for (double& x : v) x = normal(rng);
  return v;
}

inline double rel_diff(const ertinv::Vector& a, const ertinv::Vector& b) {
  ertinv::Vector d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double nb = ertinv::norm2(b);
  return ertinv::norm2(d) / (nb > 0.0 ? nb : 1.0);
}

}  // namespace test_helpers
