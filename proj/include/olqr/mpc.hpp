#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "olqr/model.hpp"
#include "olqr/offline.hpp"
#include "olqr/riccati.hpp"

namespace olqr {

// Gains of the W-step MPC subproblem solved at stage t: stage costs
// Q_t..Q_{t+W}, R_t..R_{t+W} and terminal cost P_max at t+W+1.
class MpcGains {
 public:
  MpcGains(int t, int window, BackwardPass local, std::vector<Matrix> Kbar_d,
           LinearSystem sys);

  int stage() const { return t_; }
  int window() const { return window_; }

  // Pbar_{t+tau|t} for tau = 0..W+1; Pbar_{t+W+1|t} = P_max.
  const Matrix& Pbar(int abs_stage) const { return local_.P(abs_stage); }
  // Kbar_{t+tau|t} for tau = 0..W.
  const Matrix& Kbar_local(int abs_stage) const { return local_.K(abs_stage); }
  const Matrix& Kbar() const { return local_.K(t_); }
  // Kbar_t^{d,i} for t <= i <= t+W.
  const Matrix& Kbar_d(int i) const;
  const std::vector<Matrix>& Kbar_d_row() const { return kbar_d_; }
  const BackwardPass& local_pass() const { return local_; }

  // Predicted transition Phibar_t(to, from) = (A - B_u Kbar_{to-1|t}) ...
  // (A - B_u Kbar_{from|t}) for t <= from <= to <= t+W+1.
  Matrix phibar(int to, int from) const;

 private:
  int t_;
  int window_;
  BackwardPass local_;
  std::vector<Matrix> kbar_d_;
  LinearSystem sys_;
};

// Windowed regime only (1 <= t <= T-W-1); otherwise Error(kBranch).
MpcGains mpc_gains_at(int t, const LinearSystem& sys, const CostSchedule& costs,
                      const Matrix& P_max, int window,
                      const Tolerances& tol = default_tolerances());
MpcGains mpc_gains_at(int t, const LinearSystem& sys, const CostSchedule& costs,
                      const CostBounds& bounds, int window,
                      const Tolerances& tol = default_tolerances());

// u = -Kbar_t x - sum_{i=t}^{t+W} Kbar_t^{d,i} B_d d_{i|t}
Vector mpc_action(int t, const Vector& x, const PredictionStream& preds,
                  const MpcGains& gains, const LinearSystem& sys);

enum class Branch { kWindowed, kExactTail };
const char* to_string(Branch branch);

// Which branch stage t takes: exact tail iff t > T - W - 1.
Branch branch_at(int t, int horizon, int window);

struct MpcStep {
  int t = 0;
  Branch branch = Branch::kWindowed;
  Matrix Kbar;                 // gain applied to the state
  std::vector<Matrix> Kbar_d;  // applied to B_d d_{i|t}, i = t..last
  int last = 0;                // min(t + W, T - 1)
  std::optional<MpcGains> gains;  // windowed steps, when retained
};

struct RolloutOptions {
  // Keep the feedforward gains and the full per-step MpcGains. Needed by the
  // action-error decomposition and the gain-difference checks.
  bool retain_gains = true;
};

class MpcRollout {
 public:
  MpcRollout(LinearSystem sys, int window, Trajectory traj,
             std::vector<MpcStep> steps, bool gains_retained);

  const Trajectory& trajectory() const { return traj_; }
  const std::vector<MpcStep>& steps() const { return steps_; }
  const MpcStep& step(int t) const;
  int window() const { return window_; }
  int horizon() const { return traj_.horizon(); }
  bool gains_retained() const { return gains_retained_; }
  const LinearSystem& system() const { return sys_; }

  // Closed-loop transition (A - B_u Kbar_{t-1}) ... (A - B_u Kbar_{t0}).
  Matrix phi_mpc(int t, int t0) const;

 private:
  LinearSystem sys_;
  int window_;
  Trajectory traj_;
  std::vector<MpcStep> steps_;
  bool gains_retained_;
};

// Runs the receding-horizon controller against the true trace. Windowed
// steps use the MPC gains; tail steps (t > T-W-1) use the exact offline
// gains with predicted disturbances d_{i|t} for i = t..T-1.
MpcRollout mpc_rollout(const LinearSystem& sys, const CostSchedule& costs,
                       const Matrix& P_max, const DisturbanceTrace& trace,
                       const PredictionStream& preds, int window,
                       const RolloutOptions& options = {},
                       const Tolerances& tol = default_tolerances());
MpcRollout mpc_rollout(const LinearSystem& sys, const CostSchedule& costs,
                       const CostBounds& bounds, const DisturbanceTrace& trace,
                       const PredictionStream& preds, int window,
                       const RolloutOptions& options = {},
                       const Tolerances& tol = default_tolerances());

// First input of the stage-t subproblem solved directly as a quadratic
// program in the stacked inputs (terminal P_max when windowed, Q_T in the
// exact tail).
Vector mpc_qp_crosscheck(int t, const Vector& x, const PredictionStream& preds,
                         const LinearSystem& sys, const CostSchedule& costs,
                         const Matrix& P_max, int window);

// CSV with header t,branch,x1..xn,u1..um,stage_cost.
void write_rollout_csv(std::ostream& out, const MpcRollout& rollout);

}  // namespace olqr
