#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ertinv/fem_mixed.hpp"
#include "ertinv/linalg.hpp"
#include "ertinv/minres.hpp"
#include "ertinv/sparse.hpp"
#include "ertinv/spectral.hpp"
#include "test_helpers.hpp"

using namespace ertinv;
using test_helpers::random_vector;

namespace {

LinearOperator dense_operator(const DenseMatrix& A) {
  return [&A](std::span<const double> x) { return matvec(A, x); };
}

}  // namespace

TEST_CASE("identity system converges in one iteration") {
  std::mt19937 rng(1);
  const Vector b = random_vector(20, rng);
  const Vector x0(20, 0.0);
  const SparseMatrix I = sparse_identity(20);
  auto [x, rep] = minres([&I](std::span<const double> v) { return spmv(I, v); }, b, x0, 1e-12, 100);
  CHECK(rep.converged);
  CHECK(rep.iterations <= 1);
  CHECK(test_helpers::rel_diff(x, b) <= 1e-12);
}

TEST_CASE("exact-inverse preconditioner solves an indefinite 3x3 in one iteration") {
  DenseMatrix A(3, 3);
  A(0, 0) = 2.0;
  A(1, 1) = -3.0;
  A(2, 2) = 1.0;
  A(0, 1) = A(1, 0) = 0.5;
  DenseMatrix Ainv(3, 3);
  // inverse of [[2, .5, 0], [.5, -3, 0], [0, 0, 1]]
  const double det = 2.0 * (-3.0) - 0.25;
  Ainv(0, 0) = -3.0 / det;
  Ainv(1, 1) = 2.0 / det;
  Ainv(0, 1) = Ainv(1, 0) = -0.5 / det;
  Ainv(2, 2) = 1.0;

  const Vector b{1.0, 0.2, 1.0};  // <b, A^-1 b> > 0
  const Vector x0(3, 0.0);
  auto [x, rep] = minres(dense_operator(A), dense_operator(Ainv), b, x0, 1e-12, 10);
  CHECK(rep.converged);
  CHECK(rep.iterations <= 1);
  Vector r = matvec(A, x);
  for (std::size_t i = 0; i < 3; ++i) r[i] -= b[i];
  CHECK(norm2(r) <= 1e-12 * norm2(b));
}

TEST_CASE("ideal block preconditioner gives at most 3 iterations on the mixed Laplacian") {
  const Mesh mesh = test_helpers::make_unit_square_mesh(5);
  const MixedSpaces spaces = make_mixed_spaces(mesh);
  const SparseMatrix Q = assemble_Q(spaces);
  const SparseMatrix D = assemble_D(spaces);
  const SparseMatrix A = make_saddle_matrix(Q, D);
  REQUIRE(A.n_rows <= 500);

  const DenseMatrix J_empty(0, spaces.n_cell_dofs);
  const DenseMatrix P = dense_ideal_preconditioner(Q, D, J_empty, 1.0);
  const DenseMatrix L = dense_cholesky(P);
  const LinearOperator pinv = [&L](std::span<const double> v) { return cholesky_solve(L, v); };

  std::mt19937 rng(17);
  const Vector b = random_vector(A.n_rows, rng);
  const Vector x0(A.n_rows, 0.0);
  auto [x, rep] =
      minres([&A](std::span<const double> v) { return spmv(A, v); }, pinv, b, x0, 1e-10, 50);
  CHECK(rep.converged);
  CHECK(rep.iterations <= 3);
  CHECK(rep.true_relative_residual <= 1e-9);
}

TEST_CASE("unpreconditioned recurrence residuals are non-increasing") {
  std::mt19937 rng(29);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t n = 30;
    DenseMatrix A(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        const double v = uniform(rng);
        A(i, j) = v;
        A(j, i) = v;  // symmetric indefinite
      }
    const Vector b = random_vector(n, rng);
    const Vector x0(n, 0.0);
    auto [x, rep] = minres(dense_operator(A), b, x0, 1e-10, n + 10);
    for (std::size_t k = 1; k < rep.relative_residuals.size(); ++k)
      CHECK(rep.relative_residuals[k] <= rep.relative_residuals[k - 1] + 1e-12);
    for (std::size_t k = 1; k < rep.pnorm_relative_residuals.size(); ++k)
      CHECK(rep.pnorm_relative_residuals[k] <= rep.pnorm_relative_residuals[k - 1] + 1e-12);
  }
}

TEST_CASE("Euclidean stopping holds under an SPD preconditioner") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  const std::size_t n = 40;
  DenseMatrix A(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = uniform(rng);
      A(i, j) = v;
      A(j, i) = v;
    }
  for (std::size_t i = 0; i < n; ++i) A(i, i) += (i % 2 == 0) ? 5.0 : -5.0;

  // SPD diagonal preconditioner with a wide spread.
  Vector dinv(n);
  for (std::size_t i = 0; i < n; ++i) dinv[i] = 1.0 / (1.0 + static_cast<double>(i % 7));
  const LinearOperator pinv = [&dinv](std::span<const double> v) {
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = dinv[i] * v[i];
    return out;
  };

  const Vector b = random_vector(n, rng);
  const Vector x0(n, 0.0);
  const double tol = 1e-9;
  auto [x, rep] = minres(dense_operator(A), pinv, b, x0, tol, 10 * n);
  REQUIRE(rep.converged);
  Vector r = matvec(A, x);
  for (std::size_t i = 0; i < n; ++i) r[i] -= b[i];
  CHECK(norm2(r) / norm2(b) <= 10.0 * tol);
  CHECK(rep.true_relative_residual <= 10.0 * tol);
}

TEST_CASE("breakdown reported for an inconsistent singular system") {
  DenseMatrix A(3, 3);
  A(0, 0) = 1.0;
  A(1, 1) = 1.0;  // A(2,2) = 0
  const Vector b{0.0, 0.0, 1.0};
  const Vector x0(3, 0.0);
  CHECK_THROWS_WITH_AS((void)minres(dense_operator(A), b, x0, 1e-10, 10),
                       doctest::Contains("breakdown"), std::runtime_error);
}

TEST_CASE("maxit returns the best iterate unconverged") {
  const Mesh mesh = test_helpers::make_unit_square_mesh(6);
  const MixedSpaces spaces = make_mixed_spaces(mesh);
  const SparseMatrix A = make_saddle_matrix(assemble_Q(spaces), assemble_D(spaces));
  std::mt19937 rng(5);
  const Vector b = random_vector(A.n_rows, rng);
  const Vector x0(A.n_rows, 0.0);
  auto [x, rep] = minres([&A](std::span<const double> v) { return spmv(A, v); }, b, x0, 1e-12, 3);
  CHECK_FALSE(rep.converged);
  CHECK(rep.iterations == 3);
  CHECK(rep.true_relative_residual < 1.0);
  CHECK(rep.true_relative_residual > 1e-12);
}

TEST_CASE("rejects a non-positive tolerance") {
  const SparseMatrix I = sparse_identity(2);
  const Vector b{1.0, 1.0};
  const Vector x0(2, 0.0);
  CHECK_THROWS_AS(
      (void)minres([&I](std::span<const double> v) { return spmv(I, v); }, b, x0, 0.0, 5),
      std::invalid_argument);
}
