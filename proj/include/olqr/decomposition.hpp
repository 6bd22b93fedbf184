#pragma once

#include <iosfwd>
#include <vector>

#include "olqr/mpc.hpp"
#include "olqr/offline.hpp"

namespace olqr {

// u_t^MPC - u_t^* split into
//   truncation    = sum_{i=t+W+1}^{T-1} K_t^{d,i} B_d d_i
//   prediction    = -sum_{i=t}^{t+W} Kbar_t^{d,i} B_d e_{i|t}
//   approximation = (K_t - Kbar_t) x_t + sum_{i=t}^{t+W} (K_t^{d,i} - Kbar_t^{d,i}) B_d d_i
// where u_t^* is the offline policy evaluated at the MPC state.
struct StepDecomposition {
  int t = 0;
  Vector action_error;
  Vector truncation;
  Vector prediction;
  Vector approximation;

  // |action_error - (truncation + prediction + approximation)|_inf
  double residual() const;
};

struct Decomposition {
  std::vector<StepDecomposition> steps;
  double max_residual() const;
};

// Needs a rollout run with retain_gains; otherwise Error(kConfig).
Decomposition decompose_action_errors(const MpcRollout& rollout,
                                      const OfflinePolicy& policy,
                                      const DisturbanceTrace& trace,
                                      const PredictionStream& preds);

// CSV: t, then action_error / truncation / prediction / approximation
// components.
void write_decomposition_csv(std::ostream& out, const Decomposition& dec);

// Rewrites the MPC trajectory and action errors as linear maps of
// (x_1, d, e):
//   x_t = Phi^MPC(t,1) x_1 + sum_i M_{i|t} B_d d_i
//         - sum_{j<t} sum_i Phi^MPC(t,j+1) B_u Kbar_j^{d,i} B_d e_{i|j}
//   u_t^MPC - u_t^* = N_{0|t} x_1 + sum_i N_{i|t} B_d d_i
//                     + sum_{j<=t} sum_i L_{(i,j)|t} B_d e_{i|j}
// The closed-loop transitions are tabulated once at construction.
class ExpansionMatrices {
 public:
  ExpansionMatrices(const MpcRollout& rollout, const OfflinePolicy& policy);

  int horizon() const { return T_; }
  int window() const { return W_; }

  const Matrix& phi_mpc(int t, int t0) const;

  // Defined for 1 <= i <= min(t+W, T-1); zero blocks elsewhere.
  Matrix M(int i, int t) const;
  Matrix N0(int t) const;
  Matrix N(int i, int t) const;
  // j <= t, j <= i <= min(j+W, T-1).
  Matrix L(int i, int j, int t) const;

  Vector expand_state(int t, const DisturbanceTrace& trace,
                      const PredictionStream& preds) const;
  Vector reconstruct_action_error(int t, const DisturbanceTrace& trace,
                                  const PredictionStream& preds) const;

  // Decay profiles the norms of N and L are claimed to follow, up to a
  // constant: gamma^W rho^{t-1} for N_0, and so on.
  double n0_profile(int t, double rho, double gamma) const;
  double n_profile(int i, int t, double rho, double gamma) const;
  double l_profile(int i, int j, int t, double rho, double gamma) const;

 private:
  const Matrix& kbar_d(int j, int i) const;
  Matrix gain_gap(int t) const;

  const MpcRollout& rollout_;
  const OfflinePolicy& policy_;
  int T_;
  int W_;
  // phi_[t-1][t0-1] for t0 <= t.
  std::vector<std::vector<Matrix>> phi_;
};

}  // namespace olqr
