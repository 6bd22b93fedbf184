#pragma once

#include <iosfwd>
#include <vector>

#include "olqr/model.hpp"
#include "olqr/riccati.hpp"

namespace olqr {

struct Trajectory {
  std::vector<Vector> x;            // x_1..x_T
  std::vector<Vector> u;            // u_1..u_{T-1}
  std::vector<double> stage_costs;  // T entries, the last is terminal
  double total_cost = 0.0;

  int horizon() const { return static_cast<int>(x.size()); }
  const Vector& state(int t) const { return x[static_cast<std::size_t>(t - 1)]; }
  const Vector& input(int t) const { return u[static_cast<std::size_t>(t - 1)]; }
};

// Rolls the dynamics forward under the true trace, calling
// `policy(t, x_t)` for each input, and evaluates every stage cost.
template <typename Policy>
Trajectory simulate(const LinearSystem& sys, const CostSchedule& costs,
                    const DisturbanceTrace& trace, Policy&& policy);

// Stage costs and total of a given (x, u) pair.
void evaluate_costs(const CostSchedule& costs, Trajectory& traj);

// The hindsight-optimal controller
//   u_t = -K_t x_t - sum_{i=t}^{T-1} K_t^{d,i} B_d d_i
// with K_t^{d,i} = (R_t + B_u'P_{t+1}B_u)^{-1} B_u' Phi(i+1, t+1)' P_{i+1}.
class OfflinePolicy {
 public:
  OfflinePolicy(LinearSystem sys, CostSchedule costs, BackwardPass pass,
                std::vector<std::vector<Matrix>> kd);

  const LinearSystem& system() const { return sys_; }
  const CostSchedule& costs() const { return costs_; }
  const BackwardPass& pass() const { return pass_; }
  int horizon() const { return costs_.horizon(); }

  // t <= i <= T-1. Maps an n-vector (B_d d_i) to an input.
  const Matrix& Kd(int t, int i) const;

  // Phi(t, t0) = (A - B_u K_{t-1}) ... (A - B_u K_{t0}), Phi(t, t) = I.
  Matrix phi(int t, int t0) const;

  // Optimal action at stage t from state x given the true disturbance
  // suffix d_t..d_{T-1}.
  Vector action(int t, const Vector& x, const DisturbanceTrace& trace) const;

 private:
  LinearSystem sys_;
  CostSchedule costs_;
  BackwardPass pass_;
  std::vector<std::vector<Matrix>> kd_;
};

OfflinePolicy build_offline_policy(const LinearSystem& sys,
                                   const CostSchedule& costs,
                                   const Tolerances& tol = default_tolerances());

// Feedforward gains for the pass' stages [first, last]: result[t - first][i - t]
// holds S_t^{-1} B_u' Phi(i+1, t+1)' P_{i+1} for t <= i <= last.
std::vector<std::vector<Matrix>> feedforward_gains(const BackwardPass& pass,
                                                   const LinearSystem& sys,
                                                   const Tolerances& tol = default_tolerances());

// Row t of the table above only: gains for i = t..last in O(last - t).
std::vector<Matrix> feedforward_row(const BackwardPass& pass,
                                    const LinearSystem& sys, int t,
                                    const Tolerances& tol = default_tolerances());

Trajectory optimal_rollout(const OfflinePolicy& policy,
                           const DisturbanceTrace& trace);

// CSV with header t,x1..xn,u1..um,stage_cost. The final row has empty
// input columns.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

template <typename Policy>
Trajectory simulate(const LinearSystem& sys, const CostSchedule& costs,
                    const DisturbanceTrace& trace, Policy&& policy) {
  const int T = trace.horizon();
  Trajectory traj;
  traj.x.reserve(static_cast<std::size_t>(T));
  traj.u.reserve(static_cast<std::size_t>(T - 1));
  traj.x.push_back(trace.x1());
  for (int t = 1; t <= T - 1; ++t) {
    const Vector& x = traj.x.back();
    Vector u = policy(t, x);
    traj.x.push_back(sys.A * x + sys.Bu * u + sys.Bd * trace.d(t));
    traj.u.push_back(std::move(u));
  }
  evaluate_costs(costs, traj);
  return traj;
}

}  // namespace olqr
