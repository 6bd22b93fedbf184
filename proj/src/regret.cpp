#include "olqr/regret.hpp"

#include <cmath>
#include <ostream>

#include "olqr/error.hpp"
#include "olqr/instance_io.hpp"

namespace olqr {

ExplicitConstants explicit_constants(const StabilityConstants& constants,
                                     const LinearSystem& sys,
                                     const CostBounds& bounds) {
  const double lp = constants.lambda_max_P_max;
  const double lq = constants.lambda_min_Q_min;
  const double lr = lambda_min(bounds.R_min);
  const double bu = spectral_norm(sys.Bu);
  const double coupling =
      spectral_norm(sys.Bu * spd_solve(bounds.R_min, sys.Bu.transpose()));
  const double tau = constants.tau;
  const double rho = constants.rho;

  ExplicitConstants c;
  c.c1 = tau * bu * lp / lr;
  c.alpha4 = 2.0 * bu / lr * std::pow(lp, 4) / (lq * lq) * (coupling + 1.0) /
             (1.0 - constants.gamma);
  c.alpha3 = spectral_norm(sys.A) * c.alpha4;
  c.c2 = c.alpha3;
  c.c3 = c.alpha4;
  c.c5 = coupling * lp * tau * tau / (1.0 - rho * rho);
  c.c4 = c.c5 + tau;
  c.value_gap = lp * lp / lq;
  return c;
}

double partI_coefficient(double rho, double gamma, int window) {
  const double rw = std::pow(rho, window);
  const double gw = std::pow(gamma, window);
  // (rho^W - gamma^W)/(rho - gamma) as the geometric sum
  // sum_k rho^k gamma^{W-1-k}: no cancellation near rho == gamma, and it
  // equals the limit W gamma^{W-1} there.
  double quotient = 0.0;
  for (int k = 0; k < window; ++k) {
    quotient += std::pow(rho, k) * std::pow(gamma, window - 1 - k);
  }
  const double inner = (gw + rw) / (1.0 - rho) + gamma * quotient;
  return inner * inner;
}

double partII_coefficient(double rho, double gamma, int window) {
  const double gw = std::pow(gamma, window);
  return (1.0 / (1.0 - rho) + gw / (1.0 - rho * rho)) * (1.0 + gw / (1.0 - rho));
}

RegretBound regret_bound(const StabilityConstants& constants, int window,
                                 const DisturbanceTrace& trace,
                                 const PredictionStream& preds,
                                 const LinearSystem& sys,
                                 const CostBounds& bounds) {
  const double rho = constants.rho;
  const double gamma = constants.gamma;
  if (!(rho >= 0.0 && rho < 1.0) || !(gamma >= 0.0 && gamma < 1.0)) {
    throw Error(ErrorCode::kDomain,
                "degenerate constants: need rho, gamma in [0, 1), got rho=" +
                    format_double(rho) + " gamma=" + format_double(gamma));
  }
  if (window < 0) throw Error(ErrorCode::kDomain, "window must be >= 0");
  RegretBound f;
  f.rho = rho;
  f.gamma = gamma;
  f.tau = constants.tau;
  f.window = window;
  f.partI_coeff = partI_coefficient(rho, gamma, window);
  f.partII_coeff = partII_coefficient(rho, gamma, window);
  f.energy_d = trace.x1().squaredNorm();
  for (const Vector& d : trace.all()) f.energy_d += (sys.Bd * d).squaredNorm();
  const int T = trace.horizon();
  for (int j = 1; j <= T - 1; ++j) {
    const int last = std::min(j + window, preds.last_index(j));
    for (int i = j; i <= last; ++i) {
      f.energy_e += std::pow(rho, i - j) * (sys.Bd * preds.error(j, i)).squaredNorm();
    }
  }
  f.constants = explicit_constants(constants, sys, bounds);
  return f;
}

double regret_formula(const Trajectory& traj, const OfflinePolicy& policy,
                      const DisturbanceTrace& trace) {
  const int T = policy.horizon();
  if (traj.horizon() != T || trace.horizon() != T) {
    throw Error(ErrorCode::kInstanceMismatch,
                "trajectory/policy/trace horizons differ");
  }
  double total = 0.0;
  for (int t = 1; t <= T - 1; ++t) {
    const Vector du = traj.input(t) - policy.action(t, traj.state(t), trace);
    total += du.dot(policy.pass().S(t) * du);
  }
  return total;
}

RegretReport dynamic_regret(const MpcRollout& rollout,
                            const OfflinePolicy& policy,
                            const DisturbanceTrace& trace,
                            const PredictionStream& preds,
                            const RegretOptions& options) {
  const int T = policy.horizon();
  if (rollout.horizon() != T || trace.horizon() != T) {
    throw Error(ErrorCode::kInstanceMismatch,
                "rollout/policy/trace horizons differ");
  }
  const LinearSystem& a = rollout.system();
  const LinearSystem& b = policy.system();
  if (a.A != b.A || a.Bu != b.Bu || a.Bd != b.Bd) {
    throw Error(ErrorCode::kInstanceMismatch,
                "rollout and policy were built for different systems");
  }

  RegretReport r;
  const Trajectory& traj = rollout.trajectory();
  r.J_pi = traj.total_cost;
  r.J_star = optimal_rollout(policy, trace).total_cost;
  r.regret = r.J_pi - r.J_star;
  r.action_errors.reserve(static_cast<std::size_t>(T - 1));
  for (int t = 1; t <= T - 1; ++t) {
    Vector du = traj.input(t) - policy.action(t, traj.state(t), trace);
    r.regret_formula += du.dot(policy.pass().S(t) * du);
    r.action_errors.push_back(std::move(du));
  }
  if (options.decompose && rollout.gains_retained()) {
    r.decomposition = decompose_action_errors(rollout, policy, trace, preds);
  }
  if (options.constants && options.bounds) {
    r.bound = regret_bound(*options.constants, rollout.window(), trace, preds,
                               b, *options.bounds);
  }
  return r;
}

QuadraticSumCheck quadratic_sum_inequality(const Matrix& a, const Vector& y) {
  if (a.cols() != y.size()) {
    throw Error(ErrorCode::kDimension, "a has " + std::to_string(a.cols()) +
                                           " columns but y has " +
                                           std::to_string(y.size()) + " entries");
  }
  if (a.size() > 0 && a.minCoeff() < 0.0) {
    throw Error(ErrorCode::kDomain, "coefficients must be nonnegative");
  }
  QuadraticSumCheck out;
  out.lhs = (a * y).squaredNorm();
  const Vector row_sums = a.rowwise().sum();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.cols(); ++i) {
    worst = std::max(worst, a.col(i).dot(row_sums));
  }
  out.rhs = worst * y.squaredNorm();
  out.holds = out.lhs <= out.rhs * (1.0 + 1e-12) + 1e-300;
  return out;
}

bool quadratic_sum_inequality_check(const Matrix& a, const Vector& y) {
  return quadratic_sum_inequality(a, y).holds;
}

void write_report(std::ostream& out, const RegretReport& report) {
  out << "J_pi " << format_double(report.J_pi) << '\n'
      << "J_star " << format_double(report.J_star) << '\n'
      << "regret " << format_double(report.regret) << '\n'
      << "regret_formula " << format_double(report.regret_formula) << '\n';
  if (report.decomposition) {
    out << "decomposition_max_residual "
        << format_double(report.decomposition->max_residual()) << '\n';
  }
  if (const auto& b = report.bound) {
    out << "rho " << format_double(b->rho) << '\n'
        << "gamma " << format_double(b->gamma) << '\n'
        << "tau " << format_double(b->tau) << '\n'
        << "W " << b->window << '\n'
        << "partI_coeff " << format_double(b->partI_coeff) << '\n'
        << "energy_d " << format_double(b->energy_d) << '\n'
        << "partII_coeff " << format_double(b->partII_coeff) << '\n'
        << "energy_e " << format_double(b->energy_e) << '\n'
        << "c1 " << format_double(b->constants.c1) << '\n'
        << "c2 " << format_double(b->constants.c2) << '\n'
        << "c3 " << format_double(b->constants.c3) << '\n'
        << "c4 " << format_double(b->constants.c4) << '\n'
        << "c5 " << format_double(b->constants.c5) << '\n'
        << "alpha3 " << format_double(b->constants.alpha3) << '\n'
        << "alpha4 " << format_double(b->constants.alpha4) << '\n';
  }
}

void write_constants(std::ostream& out, const StabilityConstants& constants,
                     const ExplicitConstants& c) {
  out << "tau " << format_double(constants.tau) << '\n'
      << "rho " << format_double(constants.rho) << '\n'
      << "gamma " << format_double(constants.gamma) << '\n'
      << "lambda_max_P_max " << format_double(constants.lambda_max_P_max) << '\n'
      << "lambda_min_Q_min " << format_double(constants.lambda_min_Q_min) << '\n';
  const Matrix& P = constants.P_max;
  out << "P_max";
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    for (Eigen::Index j = 0; j < P.cols(); ++j) out << ' ' << format_double(P(i, j));
  }
  out << '\n'
      << "c1 " << format_double(c.c1) << '\n'
      << "c2 " << format_double(c.c2) << '\n'
      << "c3 " << format_double(c.c3) << '\n'
      << "c4 " << format_double(c.c4) << '\n'
      << "c5 " << format_double(c.c5) << '\n'
      << "alpha3 " << format_double(c.alpha3) << '\n'
      << "alpha4 " << format_double(c.alpha4) << '\n';
}

}  // namespace olqr
