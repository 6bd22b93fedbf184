#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "olqr/decomposition.hpp"
#include "olqr/mpc.hpp"
#include "olqr/offline.hpp"
#include "olqr/riccati.hpp"

namespace olqr {

// Instance-computable constants of the regret analysis:
//   c1 = tau |B_u| lambda_max(P_max) / lambda_min(R_min)   (feedforward decay)
//   alpha4 = 2 |B_u| / lambda_min(R_min) * lambda_max(P_max)^4 / lambda_min(Q_min)^2
//            * (|B_u R_min^{-1} B_u'| + 1) / (1 - gamma),  alpha3 = |A| alpha4
//   c2 = alpha3, c3 = alpha4
//   c5 = |B_u R_min^{-1} B_u'| lambda_max(P_max) tau^2 / (1 - rho^2),  c4 = c5 + tau
struct ExplicitConstants {
  double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0, c5 = 0.0;
  double alpha3 = 0.0, alpha4 = 0.0;
  // lambda_max(P_max)^2 / lambda_min(Q_min), the Pbar-vs-P scale.
  double value_gap = 0.0;
};

ExplicitConstants explicit_constants(const StabilityConstants& constants,
                                     const LinearSystem& sys,
                                     const CostBounds& bounds);

// [(gamma^W + rho^W)/(1-rho) + gamma (rho^W - gamma^W)/(rho - gamma)]^2, with
// the quotient replaced by its limit W gamma^W at rho == gamma.
double partI_coefficient(double rho, double gamma, int window);
// (1/(1-rho) + gamma^W/(1-rho^2)) (1 + gamma^W/(1-rho))
double partII_coefficient(double rho, double gamma, int window);

struct RegretBound {
  double rho = 0.0, gamma = 0.0, tau = 0.0;
  int window = 0;
  double partI_coeff = 0.0;
  double energy_d = 0.0;  // |x_1|^2 + sum_t |B_d d_t|^2
  double partII_coeff = 0.0;
  double energy_e = 0.0;  // sum_j sum_i rho^{i-j} |B_d e_{i|j}|^2
  ExplicitConstants constants;

  // Both parts without the unstated absolute constants in front.
  double partI() const { return partI_coeff * energy_d; }
  double partII() const { return partII_coeff * energy_e; }
};

// Throws Error(kDomain) unless rho, gamma lie in [0, 1).
RegretBound regret_bound(const StabilityConstants& constants, int window,
                                 const DisturbanceTrace& trace,
                                 const PredictionStream& preds,
                                 const LinearSystem& sys,
                                 const CostBounds& bounds);

// sum_t (u_t - u_t^*)' (R_t + B_u'P_{t+1}B_u) (u_t - u_t^*), where u_t^* is
// the offline policy evaluated at the trajectory's own state x_t with the
// true disturbance suffix. Works for any trajectory driven by `trace`.
double regret_formula(const Trajectory& traj, const OfflinePolicy& policy,
                      const DisturbanceTrace& trace);

struct RegretReport {
  double J_pi = 0.0;
  double J_star = 0.0;
  double regret = 0.0;          // J_pi - J_star
  double regret_formula = 0.0;  // quadratic form in the action errors
  std::vector<Vector> action_errors;
  std::optional<Decomposition> decomposition;
  std::optional<RegretBound> bound;
};

struct RegretOptions {
  bool decompose = true;  // only when the rollout retained its gains
  std::optional<StabilityConstants> constants;  // fills `bound` when set
  std::optional<CostBounds> bounds;
};

RegretReport dynamic_regret(const MpcRollout& rollout,
                            const OfflinePolicy& policy,
                            const DisturbanceTrace& trace,
                            const PredictionStream& preds,
                            const RegretOptions& options = {});

// Checks sum_t (sum_i a(t,i) y_i)^2 <= max_i {sum_t a(t,i) sum_j a(t,j)} |y|^2.
// Rows of `a` are t, columns i. Negative entries throw Error(kDomain).
struct QuadraticSumCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};
QuadraticSumCheck quadratic_sum_inequality(const Matrix& a, const Vector& y);
bool quadratic_sum_inequality_check(const Matrix& a, const Vector& y);

// Flat "key value" lines.
void write_report(std::ostream& out, const RegretReport& report);
void write_constants(std::ostream& out, const StabilityConstants& constants,
                     const ExplicitConstants& explicit_constants);

}  // namespace olqr
