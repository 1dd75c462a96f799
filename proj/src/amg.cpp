#include "ertinv/amg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ertinv {

namespace {

/// Greedy root-node aggregation over the strength graph
/// |a_ij| > theta * sqrt(a_ii a_jj), aggregate sizes capped.
std::vector<std::size_t> aggregate(const SparseMatrix& A, const AmgOptions& options,
                                   std::size_t& n_aggregates) {
  const std::size_t n = A.n_rows;
  const double theta = options.strength;
  const Vector diag = diagonal(A);
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> agg(n, kUnset);

  const auto is_strong = [&](std::size_t i, std::size_t k) {
    const std::size_t j = A.column_indices[k];
    if (j == i) return false;
    return std::abs(A.values[k]) > theta * std::sqrt(std::abs(diag[i] * diag[j]));
  };

  n_aggregates = 0;
  std::vector<std::pair<double, std::size_t>> nbrs;
  // Pass 1: roots whose strong neighborhood is untouched seed an aggregate
  // from the strongest connections.
  for (std::size_t i = 0; i < n; ++i) {
    if (agg[i] != kUnset) continue;
    nbrs.clear();
    bool free_nbhd = true;
    for (std::size_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k) {
      if (!is_strong(i, k)) continue;
      if (agg[A.column_indices[k]] != kUnset) {
        free_nbhd = false;
        break;
      }
      nbrs.emplace_back(-std::abs(A.values[k]), A.column_indices[k]);
    }
    if (!free_nbhd || nbrs.empty()) continue;
    std::sort(nbrs.begin(), nbrs.end());
    const std::size_t id = n_aggregates++;
    agg[i] = id;
    const std::size_t take = std::min(nbrs.size(), options.max_aggregate_size - 1);
    for (std::size_t k = 0; k < take; ++k) agg[nbrs[k].second] = id;
  }
  // Pass 2: attach leftovers to the strongest aggregated neighbor.
  for (std::size_t i = 0; i < n; ++i) {
    if (agg[i] != kUnset) continue;
    double best = 0.0;
    std::size_t best_agg = kUnset;
    for (std::size_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k) {
      const std::size_t j = A.column_indices[k];
      if (is_strong(i, k) && agg[j] != kUnset && std::abs(A.values[k]) > best) {
        best = std::abs(A.values[k]);
        best_agg = agg[j];
      }
    }
    if (best_agg != kUnset) agg[i] = best_agg;
  }
  // Pass 3: isolated remainders become singletons.
  for (std::size_t i = 0; i < n; ++i)
    if (agg[i] == kUnset) agg[i] = n_aggregates++;
  return agg;
}

SparseMatrix tentative_prolongator(const std::vector<std::size_t>& agg,
                                   std::size_t n_aggregates) {
  std::vector<std::size_t> count(n_aggregates, 0);
  for (std::size_t a : agg) ++count[a];
  std::vector<Triplet> trip;
  trip.reserve(agg.size());
  for (std::size_t i = 0; i < agg.size(); ++i)
    trip.push_back({i, agg[i], 1.0 / std::sqrt(static_cast<double>(count[agg[i]]))});
  return from_triplets(agg.size(), n_aggregates, std::move(trip));
}

Vector inverse_diagonal(const SparseMatrix& A) {
  Vector d = diagonal(A);
  for (double& v : d) {
    if (!(v > 0.0)) throw std::invalid_argument("amg_setup: non-positive diagonal entry");
    v = 1.0 / v;
  }
  return d;
}

Vector cycle(const AmgHierarchy& h, std::size_t level, std::span<const double> r) {
  const AmgLevel& lv = h.levels[level];
  if (level + 1 == h.levels.size()) return cholesky_solve(h.coarse_cholesky, r);

  const double omega = h.options.jacobi_damping;
  const std::size_t n = lv.matrix.n_rows;

  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = omega * lv.inv_diag[i] * r[i];

  Vector resid(r.begin(), r.end());
  spmv_add(lv.matrix, x, -1.0, resid);

  const Vector rc = spmv_transpose(lv.prolongation, resid);
  const Vector ec = cycle(h, level + 1, rc);
  spmv_add(lv.prolongation, ec, 1.0, x);

  resid.assign(r.begin(), r.end());
  spmv_add(lv.matrix, x, -1.0, resid);
  for (std::size_t i = 0; i < n; ++i) x[i] += omega * lv.inv_diag[i] * resid[i];
  return x;
}

}  // namespace

AmgHierarchy amg_setup(const SparseMatrix& s_hat, const AmgOptions& options) {
  if (s_hat.n_rows != s_hat.n_cols) throw std::invalid_argument("amg_setup: matrix not square");
  double max_abs = 0.0;
  for (double v : s_hat.values) max_abs = std::max(max_abs, std::abs(v));
  if (symmetry_error(s_hat) > 1e-12 * std::max(max_abs, 1.0))
    throw std::invalid_argument("amg_setup: matrix not symmetric");

  AmgHierarchy h;
  h.options = options;

  if (options.exact_solve) {
    h.levels.push_back({s_hat, SparseMatrix{}, inverse_diagonal(s_hat)});
    h.exact.emplace(s_hat);
    return h;
  }

  SparseMatrix current = s_hat;
  while (h.levels.size() + 1 < options.max_levels &&
         current.n_rows > options.coarse_threshold) {
    std::size_t n_agg = 0;
    const auto agg = aggregate(current, options, n_agg);
    if (n_agg >= current.n_rows) break;  // coarsening stalled (e.g. diagonal matrix)

    const SparseMatrix T = tentative_prolongator(agg, n_agg);
    // P = (I - omega D_F^-1 A_F) T with weak couplings lumped into the
    // diagonal (filtering keeps the smoothed basis local on graded meshes).
    Vector inv_diag = inverse_diagonal(current);
    SparseMatrix filtered = current;
    {
      const Vector diag = diagonal(current);
      std::vector<double> lumped(current.n_rows, 0.0);
      for (std::size_t i = 0; i < current.n_rows; ++i) {
        for (std::size_t k = filtered.row_offsets[i]; k < filtered.row_offsets[i + 1]; ++k) {
          const std::size_t j = filtered.column_indices[k];
          if (j == i) continue;
          if (std::abs(filtered.values[k]) <=
              options.strength * std::sqrt(std::abs(diag[i] * diag[j]))) {
            lumped[i] += filtered.values[k];
            filtered.values[k] = 0.0;
          }
        }
      }
      for (std::size_t i = 0; i < current.n_rows; ++i) {
        for (std::size_t k = filtered.row_offsets[i]; k < filtered.row_offsets[i + 1]; ++k) {
          if (filtered.column_indices[k] == i) {
            filtered.values[k] += lumped[i];
            break;
          }
        }
      }
    }
    Vector scaled = inverse_diagonal(filtered);
    for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] *= options.prolongation_damping;
    SparseMatrix AT = sparse_matmul(scale_rows(filtered, scaled), T);
    std::vector<Triplet> trip;
    trip.reserve(T.nnz() + AT.nnz());
    for (std::size_t i = 0; i < T.n_rows; ++i) {
      for (std::size_t k = T.row_offsets[i]; k < T.row_offsets[i + 1]; ++k)
        trip.push_back({i, T.column_indices[k], T.values[k]});
      for (std::size_t k = AT.row_offsets[i]; k < AT.row_offsets[i + 1]; ++k)
        trip.push_back({i, AT.column_indices[k], -AT.values[k]});
    }
    SparseMatrix P = from_triplets(T.n_rows, T.n_cols, std::move(trip));

    SparseMatrix coarse = sparse_matmul(transpose(P), sparse_matmul(current, P));

    h.levels.push_back({std::move(current), std::move(P), std::move(inv_diag)});
    current = std::move(coarse);
  }
  h.levels.push_back({current, SparseMatrix{}, inverse_diagonal(current)});
  h.coarse_cholesky = dense_cholesky(to_dense(h.levels.back().matrix));
  return h;
}

Vector amg_apply(const AmgHierarchy& hierarchy, std::span<const double> r) {
  if (hierarchy.levels.empty()) throw std::invalid_argument("amg_apply: empty hierarchy");
  if (r.size() != hierarchy.size()) throw std::invalid_argument("amg_apply: dimension mismatch");
  if (hierarchy.exact) return hierarchy.exact->solve(r);
  return cycle(hierarchy, 0, r);
}

}  // namespace ertinv
