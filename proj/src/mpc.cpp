#include "olqr/mpc.hpp"

#include <ostream>

#include "olqr/error.hpp"
#include "olqr/instance_io.hpp"
#include "olqr/qp.hpp"

namespace olqr {

MpcGains::MpcGains(int t, int window, BackwardPass local,
                   std::vector<Matrix> Kbar_d, LinearSystem sys)
    : t_(t),
      window_(window),
      local_(std::move(local)),
      kbar_d_(std::move(Kbar_d)),
      sys_(std::move(sys)) {}

const Matrix& MpcGains::Kbar_d(int i) const {
  if (i < t_ || i > t_ + window_) {
    throw Error(ErrorCode::kDomain, "Kbar^{d," + std::to_string(i) + "}_" +
                                        std::to_string(t_) + " outside window");
  }
  return kbar_d_[static_cast<std::size_t>(i - t_)];
}

Matrix MpcGains::phibar(int to, int from) const {
  if (from < t_ || to < from || to > t_ + window_ + 1) {
    throw Error(ErrorCode::kDomain, "Phibar_t(" + std::to_string(to) + ", " +
                                        std::to_string(from) + ") undefined");
  }
  Matrix out = Matrix::Identity(sys_.n(), sys_.n());
  for (int s = from; s < to; ++s) {
    out = (sys_.A - sys_.Bu * local_.K(s)) * out;
  }
  return out;
}

Branch branch_at(int t, int horizon, int window) {
  return t > horizon - window - 1 ? Branch::kExactTail : Branch::kWindowed;
}

const char* to_string(Branch branch) {
  return branch == Branch::kWindowed ? "windowed" : "exact-tail";
}

MpcGains mpc_gains_at(int t, const LinearSystem& sys, const CostSchedule& costs,
                      const Matrix& P_max, int window, const Tolerances& tol) {
  const int T = costs.horizon();
  if (window < 0) throw Error(ErrorCode::kDomain, "window must be >= 0");
  if (t < 1 || branch_at(t, T, window) != Branch::kWindowed) {
    throw Error(ErrorCode::kBranch,
                "stage " + std::to_string(t) + " is not in the windowed regime "
                "1 <= t <= T-W-1; use the exact-tail path");
  }
  BackwardPass local = backward_pass(costs, t, t + window, P_max, sys,
                                     BackwardPass::Source::kMpcLocal, tol);
  std::vector<Matrix> row = feedforward_row(local, sys, t, tol);
  return MpcGains(t, window, std::move(local), std::move(row), sys);
}

MpcGains mpc_gains_at(int t, const LinearSystem& sys, const CostSchedule& costs,
                      const CostBounds& bounds, int window,
                      const Tolerances& tol) {
  const Matrix P_max = solve_dare(bounds.Q_max, bounds.R_max, sys, tol.dare_tol,
                                  tol.dare_max_iter);
  return mpc_gains_at(t, sys, costs, P_max, window, tol);
}

namespace {

Vector apply_step(const MpcStep& step, const Vector& x,
                  const PredictionStream& preds, const LinearSystem& sys) {
  Vector u = -step.Kbar * x;
  for (int i = step.t; i <= step.last; ++i) {
    u -= step.Kbar_d[static_cast<std::size_t>(i - step.t)] *
         (sys.Bd * preds.predicted(step.t, i));
  }
  return u;
}

}  // namespace

Vector mpc_action(int t, const Vector& x, const PredictionStream& preds,
                  const MpcGains& gains, const LinearSystem& sys) {
  if (gains.stage() != t) {
    throw Error(ErrorCode::kDomain, "gains were built for stage " +
                                        std::to_string(gains.stage()));
  }
  Vector u = -gains.Kbar() * x;
  for (int i = t; i <= t + gains.window(); ++i) {
    u -= gains.Kbar_d(i) * (sys.Bd * preds.predicted(t, i));
  }
  return u;
}

MpcRollout::MpcRollout(LinearSystem sys, int window, Trajectory traj,
                       std::vector<MpcStep> steps, bool gains_retained)
    : sys_(std::move(sys)),
      window_(window),
      traj_(std::move(traj)),
      steps_(std::move(steps)),
      gains_retained_(gains_retained) {}

const MpcStep& MpcRollout::step(int t) const {
  if (t < 1 || t > static_cast<int>(steps_.size())) {
    throw Error(ErrorCode::kDomain, "no MPC step " + std::to_string(t));
  }
  return steps_[static_cast<std::size_t>(t - 1)];
}

Matrix MpcRollout::phi_mpc(int t, int t0) const {
  if (t0 < 1 || t < t0 || t > horizon()) {
    throw Error(ErrorCode::kDomain, "Phi^MPC(" + std::to_string(t) + ", " +
                                        std::to_string(t0) + ") undefined");
  }
  Matrix out = Matrix::Identity(sys_.n(), sys_.n());
  for (int s = t0; s < t; ++s) {
    out = (sys_.A - sys_.Bu * step(s).Kbar) * out;
  }
  return out;
}

MpcRollout mpc_rollout(const LinearSystem& sys, const CostSchedule& costs,
                       const Matrix& P_max, const DisturbanceTrace& trace,
                       const PredictionStream& preds, int window,
                       const RolloutOptions& options, const Tolerances& tol) {
  const int T = costs.horizon();
  if (trace.horizon() != T || preds.horizon() != T) {
    throw Error(ErrorCode::kInstanceMismatch,
                "trace/prediction horizon differs from the cost schedule");
  }
  if (window < 0) throw Error(ErrorCode::kDomain, "window must be >= 0");
  if (preds.window() < window) {
    throw Error(ErrorCode::kStream, "prediction stream window " +
                                        std::to_string(preds.window()) +
                                        " shorter than W=" + std::to_string(window));
  }

  // Every tail stage shares the offline values P_{t+1}..P_T, which depend
  // only on costs inside the last window.
  const int tail_start = std::max(1, T - window);
  const BackwardPass tail = backward_pass(costs, tail_start, T - 1,
                                          costs.terminal(), sys,
                                          BackwardPass::Source::kOffline, tol);

  std::vector<MpcStep> steps;
  steps.reserve(static_cast<std::size_t>(T - 1));
  Trajectory traj = simulate(sys, costs, trace, [&](int t, const Vector& x) {
    MpcStep step;
    step.t = t;
    step.branch = branch_at(t, T, window);
    step.last = std::min(t + window, T - 1);
    if (step.branch == Branch::kWindowed) {
      MpcGains gains = mpc_gains_at(t, sys, costs, P_max, window, tol);
      step.Kbar = gains.Kbar();
      step.Kbar_d = gains.Kbar_d_row();
      if (options.retain_gains) step.gains = std::move(gains);
    } else {
      step.Kbar = tail.K(t);
      step.Kbar_d = feedforward_row(tail, sys, t, tol);
    }
    Vector u = apply_step(step, x, preds, sys);
    if (!options.retain_gains) step.Kbar_d.clear();
    steps.push_back(std::move(step));
    return u;
  });
  return MpcRollout(sys, window, std::move(traj), std::move(steps),
                    options.retain_gains);
}

MpcRollout mpc_rollout(const LinearSystem& sys, const CostSchedule& costs,
                       const CostBounds& bounds, const DisturbanceTrace& trace,
                       const PredictionStream& preds, int window,
                       const RolloutOptions& options, const Tolerances& tol) {
  const Matrix P_max = solve_dare(bounds.Q_max, bounds.R_max, sys, tol.dare_tol,
                                  tol.dare_max_iter);
  return mpc_rollout(sys, costs, P_max, trace, preds, window, options, tol);
}

Vector mpc_qp_crosscheck(int t, const Vector& x, const PredictionStream& preds,
                         const LinearSystem& sys, const CostSchedule& costs,
                         const Matrix& P_max, int window) {
  const int T = costs.horizon();
  const bool windowed = branch_at(t, T, window) == Branch::kWindowed;
  const int last = windowed ? t + window : T - 1;
  std::vector<Matrix> Q, R;
  std::vector<Vector> d;
  for (int k = t; k <= last; ++k) {
    Q.push_back(costs.Q(k));
    R.push_back(costs.R(k));
    d.push_back(preds.predicted(t, k));
  }
  const Vector u = solve_input_qp(sys, Q, R, windowed ? P_max : costs.terminal(),
                                  x, d);
  return u.head(sys.nu());
}

void write_rollout_csv(std::ostream& out, const MpcRollout& rollout) {
  const Trajectory& traj = rollout.trajectory();
  const Eigen::Index n = traj.x.front().size();
  const Eigen::Index m = traj.u.empty() ? 0 : traj.u.front().size();
  out << "t,branch";
  for (Eigen::Index k = 1; k <= n; ++k) out << ",x" << k;
  for (Eigen::Index k = 1; k <= m; ++k) out << ",u" << k;
  out << ",stage_cost\n";
  for (int t = 1; t <= traj.horizon(); ++t) {
    out << t << ',';
    if (t < traj.horizon()) out << to_string(rollout.step(t).branch);
    else out << "terminal";
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
