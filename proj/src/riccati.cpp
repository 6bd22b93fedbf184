#include "olqr/riccati.hpp"

#include <cmath>
#include <sstream>

#include "olqr/error.hpp"

namespace olqr {

namespace {

void require_square(const Matrix& m, Eigen::Index dim, const char* name) {
  if (m.rows() != dim || m.cols() != dim) {
    std::ostringstream msg;
    msg << name << " must be " << dim << "x" << dim << ", got " << m.rows()
        << "x" << m.cols();
    throw Error(ErrorCode::kDimension, msg.str());
  }
}

}  // namespace

Matrix feedback_gain(const Matrix& R, const Matrix& P_next,
                     const LinearSystem& sys, const Tolerances& tol) {
  const Matrix BtP = sys.Bu.transpose() * P_next;
  const Matrix S = symmetrize(R + BtP * sys.Bu);
  return spd_solve(S, BtP * sys.A, tol.singular_condition);
}

Matrix riccati_step(const Matrix& Q, const Matrix& R, const Matrix& P,
                    const LinearSystem& sys, const Tolerances& tol) {
  require_square(Q, sys.n(), "Q");
  require_square(P, sys.n(), "P");
  require_square(R, sys.nu(), "R");
  const Matrix BtP = sys.Bu.transpose() * P;
  const Matrix S = symmetrize(R + BtP * sys.Bu);
  const Matrix BtPA = BtP * sys.A;
  const Matrix gain = spd_solve(S, BtPA, tol.singular_condition);
  Matrix out = Q + sys.A.transpose() * P * sys.A - BtPA.transpose() * gain;
  return symmetrize(out);
}

BackwardPass::BackwardPass(int first, int last, std::vector<Matrix> P,
                           std::vector<Matrix> K, std::vector<Matrix> S,
                           Source source)
    : first_(first),
      last_(last),
      P_(std::move(P)),
      K_(std::move(K)),
      S_(std::move(S)),
      source_(source) {}

const Matrix& BackwardPass::P(int t) const {
  if (t < first_ || t > last_ + 1) {
    throw Error(ErrorCode::kDomain, "P(" + std::to_string(t) +
                                        ") outside pass [" +
                                        std::to_string(first_) + ", " +
                                        std::to_string(last_ + 1) + "]");
  }
  return P_[t - first_];
}

const Matrix& BackwardPass::K(int t) const {
  if (t < first_ || t > last_) {
    throw Error(ErrorCode::kDomain, "K(" + std::to_string(t) +
                                        ") outside pass [" +
                                        std::to_string(first_) + ", " +
                                        std::to_string(last_) + "]");
  }
  return K_[t - first_];
}

const Matrix& BackwardPass::S(int t) const {
  if (t < first_ || t > last_) {
    throw Error(ErrorCode::kDomain, "S(" + std::to_string(t) +
                                        ") outside pass");
  }
  return S_[t - first_];
}

BackwardPass backward_pass(const CostSchedule& costs, const Matrix& terminal,
                           const LinearSystem& sys, const Tolerances& tol) {
  return backward_pass(costs, 1, costs.horizon() - 1, terminal, sys,
                       BackwardPass::Source::kOffline, tol);
}

BackwardPass backward_pass(const CostSchedule& costs, int first, int last,
                           const Matrix& terminal, const LinearSystem& sys,
                           BackwardPass::Source source,
                           const Tolerances& tol) {
  if (first < 1 || last > costs.horizon() - 1 || first > last + 1) {
    throw Error(ErrorCode::kHorizon,
                "backward pass range [" + std::to_string(first) + ", " +
                    std::to_string(last) + "] invalid for horizon " +
                    std::to_string(costs.horizon()));
  }
  require_square(terminal, sys.n(), "terminal");
  const std::size_t stages = static_cast<std::size_t>(last - first + 1);
  std::vector<Matrix> P(stages + 1);
  std::vector<Matrix> K(stages);
  std::vector<Matrix> S(stages);
  P[stages] = symmetrize(terminal);
  for (int t = last; t >= first; --t) {
    const std::size_t k = static_cast<std::size_t>(t - first);
    const Matrix& P_next = P[k + 1];
    try {
      const Matrix BtP = sys.Bu.transpose() * P_next;
      S[k] = symmetrize(costs.R(t) + BtP * sys.Bu);
      K[k] = spd_solve(S[k], BtP * sys.A, tol.singular_condition);
      P[k] = riccati_step(costs.Q(t), costs.R(t), P_next, sys, tol);
    } catch (const Error& e) {
      throw Error(e.code(), "stage " + std::to_string(t) + ": " + e.what());
    }
  }
  return BackwardPass(first, last, std::move(P), std::move(K), std::move(S),
                      source);
}

DareResult solve_dare_detailed(const Matrix& Q, const Matrix& R,
                               const LinearSystem& sys, double tol,
                               int max_iter) {
  Matrix P = symmetrize(Q);
  double residual = INFINITY;
  for (int it = 1; it <= max_iter; ++it) {
    Matrix next = riccati_step(Q, R, P, sys);
    // Overflow makes the difference NaN, and the SVD of a NaN matrix does
    // not reliably report it.
    if (!next.allFinite()) {
      residual = INFINITY;
      break;
    }
    residual = spectral_norm(next - P);
    P = std::move(next);
    if (!std::isfinite(residual)) break;
    if (residual <= tol) {
      return {P, it, residual};
    }
  }
  std::ostringstream msg;
  msg << "DARE iteration did not converge (residual " << residual
      << "); (A, B_u) is likely not stabilizable";
  throw Error(ErrorCode::kDivergence, msg.str());
}

Matrix solve_dare(const Matrix& Q, const Matrix& R, const LinearSystem& sys,
                  double tol, int max_iter) {
  return solve_dare_detailed(Q, R, sys, tol, max_iter).P;
}

double delta_inf(const Matrix& P, const Matrix& Pbar, const Tolerances& tol) {
  if (P.rows() != P.cols() || Pbar.rows() != P.rows() ||
      Pbar.cols() != P.cols()) {
    throw Error(ErrorCode::kDimension, "delta_inf arguments differ in shape");
  }
  if (!(lambda_min(symmetrize(P)) > 0.0) ||
      !(lambda_min(symmetrize(Pbar)) > 0.0)) {
    throw Error(ErrorCode::kDomain, "delta_inf requires positive definite");
  }
  const Matrix root = spd_inv_sqrt(P, tol.eig_floor);
  const Matrix inner = symmetrize(root * Pbar * root);
  Eigen::SelfAdjointEigenSolver<Matrix> es(inner, Eigen::EigenvaluesOnly);
  double worst = 0.0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    const double lam = std::max(es.eigenvalues()(k), tol.eig_floor);
    worst = std::max(worst, std::abs(std::log(lam)));
  }
  return worst;
}

StabilityConstants constants_from(const Matrix& P_max, const Matrix& Q_min,
                                  const Matrix& A) {
  StabilityConstants c;
  c.P_max = P_max;
  c.lambda_max_P_max = lambda_max(P_max);
  c.lambda_min_Q_min = lambda_min(Q_min);
  c.tau = std::sqrt(c.lambda_max_P_max / c.lambda_min_Q_min);
  c.rho = std::sqrt(1.0 - c.lambda_min_Q_min / c.lambda_max_P_max);
  const double a = lambda_max(symmetrize(A.transpose() * P_max * A));
  c.gamma = a / (c.lambda_min_Q_min + a);
  return c;
}

StabilityConstants stability_constants(const LinearSystem& sys,
                                       const CostBounds& bounds,
                                       const Tolerances& tol) {
  const Matrix P_max = solve_dare(bounds.Q_max, bounds.R_max, sys,
                                  tol.dare_tol, tol.dare_max_iter);
  return constants_from(P_max, bounds.Q_min, sys.A);
}

}  // namespace olqr
