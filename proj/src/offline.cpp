#include "olqr/offline.hpp"

#include <ostream>

#include "olqr/error.hpp"
#include "olqr/instance_io.hpp"

namespace olqr {

void evaluate_costs(const CostSchedule& costs, Trajectory& traj) {
  const int T = costs.horizon();
  if (traj.horizon() != T || static_cast<int>(traj.u.size()) != T - 1) {
    throw Error(ErrorCode::kDimension, "trajectory length does not match T");
  }
  traj.stage_costs.assign(static_cast<std::size_t>(T), 0.0);
  double total = 0.0;
  for (int t = 1; t <= T; ++t) {
    const Vector& x = traj.state(t);
    double c = x.dot(costs.Q(t) * x);
    if (t < T) {
      const Vector& u = traj.input(t);
      c += u.dot(costs.R(t) * u);
    }
    traj.stage_costs[static_cast<std::size_t>(t - 1)] = c;
    total += c;
  }
  traj.total_cost = total;
}

std::vector<std::vector<Matrix>> feedforward_gains(const BackwardPass& pass,
                                                   const LinearSystem& sys,
                                                   const Tolerances& tol) {
  const int first = pass.first();
  const int last = pass.last();
  std::vector<std::vector<Matrix>> kd(static_cast<std::size_t>(last - first + 1));
  for (int t = first; t <= last; ++t) {
    kd[static_cast<std::size_t>(t - first)].resize(
        static_cast<std::size_t>(last - t + 1));
  }
  // X_t^{d,i} = Phi(i+1, t+1)' P_{i+1}, built backwards in t through
  // X_t^{d,i} = (A - B_u K_{t+1})' X_{t+1}^{d,i}.
  for (int i = first; i <= last; ++i) {
    Matrix X = pass.P(i + 1);
    for (int t = i; t >= first; --t) {
      if (t < i) {
        X = (sys.A - sys.Bu * pass.K(t + 1)).transpose() * X;
      }
      kd[static_cast<std::size_t>(t - first)][static_cast<std::size_t>(i - t)] =
          spd_solve(pass.S(t), sys.Bu.transpose() * X, tol.singular_condition);
    }
  }
  return kd;
}

std::vector<Matrix> feedforward_row(const BackwardPass& pass,
                                    const LinearSystem& sys, int t,
                                    const Tolerances& tol) {
  const int last = pass.last();
  std::vector<Matrix> row;
  row.reserve(static_cast<std::size_t>(last - t + 1));
  const Matrix Bt = sys.Bu.transpose();
  Matrix phi = Matrix::Identity(sys.n(), sys.n());  // Phi(i+1, t+1)
  for (int i = t; i <= last; ++i) {
    if (i > t) phi = (sys.A - sys.Bu * pass.K(i)) * phi;
    row.push_back(spd_solve(pass.S(t), Bt * phi.transpose() * pass.P(i + 1),
                            tol.singular_condition));
  }
  return row;
}

OfflinePolicy::OfflinePolicy(LinearSystem sys, CostSchedule costs,
                             BackwardPass pass,
                             std::vector<std::vector<Matrix>> kd)
    : sys_(std::move(sys)),
      costs_(std::move(costs)),
      pass_(std::move(pass)),
      kd_(std::move(kd)) {}

const Matrix& OfflinePolicy::Kd(int t, int i) const {
  const int T = horizon();
  if (t < 1 || t > T - 1 || i < t || i > T - 1) {
    throw Error(ErrorCode::kDomain, "K^{d," + std::to_string(i) + "}_" +
                                        std::to_string(t) + " undefined");
  }
  return kd_[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(i - t)];
}

Matrix OfflinePolicy::phi(int t, int t0) const {
  if (t0 < 1 || t < t0 || t > horizon()) {
    throw Error(ErrorCode::kDomain, "Phi(" + std::to_string(t) + ", " +
                                        std::to_string(t0) + ") undefined");
  }
  Matrix out = Matrix::Identity(sys_.n(), sys_.n());
  for (int s = t0; s < t; ++s) {
    out = (sys_.A - sys_.Bu * pass_.K(s)) * out;
  }
  return out;
}

Vector OfflinePolicy::action(int t, const Vector& x,
                             const DisturbanceTrace& trace) const {
  const int T = horizon();
  if (trace.horizon() != T) {
    throw Error(ErrorCode::kInstanceMismatch, "trace horizon differs from policy");
  }
  Vector u = -pass_.K(t) * x;
  for (int i = t; i <= T - 1; ++i) {
    u -= Kd(t, i) * (sys_.Bd * trace.d(i));
  }
  return u;
}

OfflinePolicy build_offline_policy(const LinearSystem& sys,
                                   const CostSchedule& costs,
                                   const Tolerances& tol) {
  BackwardPass pass = backward_pass(costs, costs.terminal(), sys, tol);
  auto kd = feedforward_gains(pass, sys, tol);
  return OfflinePolicy(sys, costs, std::move(pass), std::move(kd));
}

Trajectory optimal_rollout(const OfflinePolicy& policy,
                           const DisturbanceTrace& trace) {
  if (trace.horizon() != policy.horizon()) {
    throw Error(ErrorCode::kDimension, "trace length must be T-1");
  }
  return simulate(policy.system(), policy.costs(), trace,
                  [&](int t, const Vector& x) { return policy.action(t, x, trace); });
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const Eigen::Index n = traj.x.empty() ? 0 : traj.x.front().size();
  const Eigen::Index m = traj.u.empty() ? 0 : traj.u.front().size();
  out << 't';
  for (Eigen::Index k = 1; k <= n; ++k) out << ",x" << k;
  for (Eigen::Index k = 1; k <= m; ++k) out << ",u" << k;
  out << ",stage_cost\n";
  for (int t = 1; t <= traj.horizon(); ++t) {
    out << t;
    for (Eigen::Index k = 0; k < n; ++k) out << ',' << format_double(traj.state(t)(k));
    for (Eigen::Index k = 0; k < m; ++k) {
      out << ',';
      if (t < traj.horizon()) out << format_double(traj.input(t)(k));
    }
    out << ',' << format_double(traj.stage_costs[static_cast<std::size_t>(t - 1)])
        << '\n';
  }
}

}  // namespace olqr
