#pragma once

#include <Eigen/Dense>

namespace olqr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Induced 2-norm. Every "norm of a matrix" in this library means this one.
double spectral_norm(const Matrix& m);

double max_asymmetry(const Matrix& m);
Matrix symmetrize(const Matrix& m);

double lambda_min(const Matrix& sym);
double lambda_max(const Matrix& sym);

// True when lambda_min(upper - lower) >= -tol.
bool loewner_leq(const Matrix& lower, const Matrix& upper, double tol);

// Matrix functions of a symmetric positive definite argument, all through the
// symmetric eigendecomposition. Eigenvalues are floored at `floor`.
Matrix spd_sqrt(const Matrix& sym, double floor = 1e-300);
Matrix spd_inv_sqrt(const Matrix& sym, double floor = 1e-300);
Matrix spd_log(const Matrix& sym, double floor = 1e-300);

// Solve (sym) X = rhs for a symmetric positive definite `sym`. Throws
// Error(kSolver) when the condition number exceeds `max_condition`.
Matrix spd_solve(const Matrix& sym, const Matrix& rhs,
                 double max_condition = 1e14);

int numerical_rank(const Matrix& m, double relative_threshold);

}  // namespace olqr
