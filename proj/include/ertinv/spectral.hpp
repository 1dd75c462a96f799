#pragma once

#include "ertinv/linalg.hpp"
#include "ertinv/sparse.hpp"

namespace ertinv {

/// Dense A_{beta,m} = [[Q, D^T], [D, -(1/beta) J^T J]]. Small instances only.
DenseMatrix dense_saddle_matrix(const SparseMatrix& Q, const SparseMatrix& D,
                                const DenseMatrix& J, double beta);

/// Dense ideal preconditioner P_{beta,m} = diag(Q, D Q^-1 D^T + (1/beta) J^T J).
/// With an empty J this is the unperturbed P = diag(Q, S).
DenseMatrix dense_ideal_preconditioner(const SparseMatrix& Q, const SparseMatrix& D,
                                       const DenseMatrix& J, double beta);

/// Eigenvalues of P^-1 A for symmetric A and SPD P, ascending. Solved as the
/// symmetric problem L^-1 A L^-T with P = L L^T.
std::vector<double> preconditioned_eigenvalues(const DenseMatrix& A, const DenseMatrix& P);

}  // namespace ertinv
