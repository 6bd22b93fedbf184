#pragma once

#include <string>
#include <vector>

#include "olqr/linalg.hpp"
#include "olqr/model.hpp"
#include "olqr/tolerances.hpp"

namespace olqr {

// F_{Q,R}(P) = Q + A'PA - A'PB_u (R + B_u'PB_u)^{-1} B_u'PA, symmetrized.
Matrix riccati_step(const Matrix& Q, const Matrix& R, const Matrix& P,
                    const LinearSystem& sys,
                    const Tolerances& tol = default_tolerances());

// (R + B_u'PB_u)^{-1} B_u' P A
Matrix feedback_gain(const Matrix& R, const Matrix& P_next,
                     const LinearSystem& sys,
                     const Tolerances& tol = default_tolerances());

// Value matrices and gains of a finite-horizon LQR over stages
// [first, last] with terminal matrix at stage last + 1.
class BackwardPass {
 public:
  enum class Source { kOffline, kMpcLocal };

  BackwardPass(int first, int last, std::vector<Matrix> P,
               std::vector<Matrix> K, std::vector<Matrix> S, Source source);

  int first() const { return first_; }
  int last() const { return last_; }
  Source source() const { return source_; }

  // Defined for first <= t <= last + 1.
  const Matrix& P(int t) const;
  // Defined for first <= t <= last.
  const Matrix& K(int t) const;
  // R_t + B_u' P_{t+1} B_u, defined for first <= t <= last.
  const Matrix& S(int t) const;

 private:
  int first_;
  int last_;
  std::vector<Matrix> P_;
  std::vector<Matrix> K_;
  std::vector<Matrix> S_;
  Source source_;
};

// Full offline pass: stages 1..T-1, terminal `terminal` at stage T.
BackwardPass backward_pass(const CostSchedule& costs, const Matrix& terminal,
                           const LinearSystem& sys,
                           const Tolerances& tol = default_tolerances());

// Pass restricted to stages [first, last] with terminal at last + 1.
// Riccati failures are rethrown with the stage index attached.
BackwardPass backward_pass(const CostSchedule& costs, int first, int last,
                           const Matrix& terminal, const LinearSystem& sys,
                           BackwardPass::Source source,
                           const Tolerances& tol = default_tolerances());

struct DareResult {
  Matrix P;
  int iterations;
  double residual;
};

// Fixed-point iteration P <- F_{Q,R}(P) from P = Q until
// ||F(P) - P|| <= tol. Throws Error(kDivergence) after max_iter.
DareResult solve_dare_detailed(const Matrix& Q, const Matrix& R,
                               const LinearSystem& sys, double tol = 1e-12,
                               int max_iter = 100000);

Matrix solve_dare(const Matrix& Q, const Matrix& R, const LinearSystem& sys,
                  double tol = 1e-12, int max_iter = 100000);

// max |log lambda| over the eigenvalues of P^{-1/2} Pbar P^{-1/2}.
double delta_inf(const Matrix& P, const Matrix& Pbar,
                 const Tolerances& tol = default_tolerances());

struct StabilityConstants {
  Matrix P_max;
  double lambda_max_P_max = 0.0;
  double lambda_min_Q_min = 0.0;
  double tau = 0.0;
  double rho = 0.0;
  double gamma = 0.0;
};

StabilityConstants stability_constants(
    const LinearSystem& sys, const CostBounds& bounds,
    const Tolerances& tol = default_tolerances());

// Closed formulas for tau, rho, gamma given P_max and Q_min.
StabilityConstants constants_from(const Matrix& P_max, const Matrix& Q_min,
                                  const Matrix& A);

}  // namespace olqr
