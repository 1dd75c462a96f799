#include "ertinv/minres.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace ertinv {

namespace {

Vector combine(std::span<const double> a, double ca, std::span<const double> b, double cb,
               std::span<const double> c, double cc) {
  Vector out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ca * a[i] + cb * b[i] + cc * c[i];
  return out;
}

}  // namespace

std::pair<Vector, MinresReport> minres(const LinearOperator& apply_A,
                                       const LinearOperator& apply_Pinv,
                                       std::span<const double> b,
                                       std::span<const double> x0, double tol,
                                       std::size_t maxit) {
  if (!(tol > 0.0)) throw std::invalid_argument("minres: tol must be positive");
  const std::size_t n = b.size();
  if (x0.size() != n) throw std::invalid_argument("minres: x0/b size mismatch");

  MinresReport report;
  Vector x(x0.begin(), x0.end());

  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    // Only x with A x = 0 satisfies the tolerance; x0 = 0 is returned as-is.
    report.converged = (norm2(apply_A(x)) == 0.0);
    report.relative_residuals.push_back(0.0);
    report.pnorm_relative_residuals.push_back(0.0);
    return {std::move(x), report};
  }

  Vector r = apply_A(x);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];

  Vector z = apply_Pinv(r);
  const double gamma_sq0 = dot(r, z);
  if (gamma_sq0 < 0.0)
    throw std::runtime_error("minres: preconditioner is not positive definite");
  const double gamma1 = std::sqrt(gamma_sq0);

  report.relative_residuals.push_back(norm2(r) / bnorm);
  report.pnorm_relative_residuals.push_back(1.0);
  if (report.relative_residuals.back() <= tol) {
    report.converged = true;
    report.true_relative_residual = report.relative_residuals.back();
    return {std::move(x), report};
  }
  if (gamma1 == 0.0)
    throw std::runtime_error("minres: breakdown (zero preconditioned residual, nonzero residual)");

  const Vector zero(n, 0.0);
  Vector v_prev = zero, v_cur = r;
  Vector w_prev = zero, w_cur = zero;   // solution-space directions
  Vector u_prev = zero, u_cur = zero;   // their images under A (keeps r recurred exactly)
  double gamma_prev = 1.0, gamma_cur = gamma1;
  double c_prev = 1.0, c_cur = 1.0, s_prev = 0.0, s_cur = 0.0;
  double eta = gamma1;

  const double exhausted_tol = 1e-13 * gamma1;

  for (std::size_t j = 1; j <= maxit; ++j) {
    Vector zhat = z;
    scale(1.0 / gamma_cur, zhat);
    Vector Az = apply_A(zhat);
    const double delta = dot(Az, zhat);

    Vector v_next =
        combine(Az, 1.0, v_cur, -delta / gamma_cur, v_prev, -gamma_cur / gamma_prev);
    Vector z_next = apply_Pinv(v_next);
    double gamma_sq = dot(z_next, v_next);
    if (gamma_sq < -1e-12 * (norm2(z_next) * norm2(v_next) + 1.0))
      throw std::runtime_error("minres: preconditioner is not positive definite");
    const double gamma_next = std::sqrt(std::max(gamma_sq, 0.0));

    const double alpha0 = c_cur * delta - c_prev * s_cur * gamma_cur;
    const double alpha1 = std::sqrt(alpha0 * alpha0 + gamma_next * gamma_next);
    const double alpha2 = s_cur * delta + c_prev * c_cur * gamma_cur;
    const double alpha3 = s_prev * gamma_cur;
    if (alpha1 == 0.0)
      throw std::runtime_error("minres: breakdown (stagnated rotation)");
    const double c_next = alpha0 / alpha1;
    const double s_next = gamma_next / alpha1;

    Vector w_next = combine(zhat, 1.0, w_prev, -alpha3, w_cur, -alpha2);
    scale(1.0 / alpha1, w_next);
    Vector u_next = combine(Az, 1.0, u_prev, -alpha3, u_cur, -alpha2);
    scale(1.0 / alpha1, u_next);

    const double tau = c_next * eta;
    axpy(tau, w_next, x);
    axpy(-tau, u_next, r);
    eta = -s_next * eta;

    report.iterations = j;
    const double rel = norm2(r) / bnorm;
    report.relative_residuals.push_back(rel);
    report.pnorm_relative_residuals.push_back(std::abs(eta) / gamma1);

    if (rel <= tol) {
      // Guard against recurrence drift before declaring success.
      Vector r_true = apply_A(x);
      for (std::size_t i = 0; i < n; ++i) r_true[i] = b[i] - r_true[i];
      const double rel_true = norm2(r_true) / bnorm;
      r = std::move(r_true);
      report.relative_residuals.back() = rel_true;
      if (rel_true <= 10.0 * tol) {
        report.converged = true;
        report.true_relative_residual = rel_true;
        return {std::move(x), report};
      }
    }

    if (gamma_next <= exhausted_tol) {
      // Krylov space exhausted; the iterate is exact up to round-off.
      Vector r_true = apply_A(x);
      for (std::size_t i = 0; i < n; ++i) r_true[i] = b[i] - r_true[i];
      const double rel_true = norm2(r_true) / bnorm;
      report.true_relative_residual = rel_true;
      if (rel_true <= 10.0 * tol) {
        report.converged = true;
        return {std::move(x), report};
      }
      throw std::runtime_error("minres: breakdown (Krylov space exhausted before convergence)");
    }

    v_prev = std::move(v_cur);
    v_cur = std::move(v_next);
    z = std::move(z_next);
    gamma_prev = gamma_cur;
    gamma_cur = gamma_next;
    c_prev = c_cur;
    c_cur = c_next;
    s_prev = s_cur;
    s_cur = s_next;
    w_prev = std::move(w_cur);
    w_cur = std::move(w_next);
    u_prev = std::move(u_cur);
    u_cur = std::move(u_next);
  }

  Vector r_true = apply_A(x);
  for (std::size_t i = 0; i < n; ++i) r_true[i] = b[i] - r_true[i];
  report.true_relative_residual = norm2(r_true) / bnorm;
  report.converged = false;
  return {std::move(x), report};
}

std::pair<Vector, MinresReport> minres(const LinearOperator& apply_A,
                                       std::span<const double> b,
                                       std::span<const double> x0, double tol,
                                       std::size_t maxit) {
  LinearOperator identity = [](std::span<const double> v) { return Vector(v.begin(), v.end()); };
  return minres(apply_A, identity, b, x0, tol, maxit);
}

}  // namespace ertinv
