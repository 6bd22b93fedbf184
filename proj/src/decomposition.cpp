#include "olqr/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "olqr/error.hpp"
#include "olqr/instance_io.hpp"

namespace olqr {

double StepDecomposition::residual() const {
  return (action_error - truncation - prediction - approximation)
      .cwiseAbs()
      .maxCoeff();
}

double Decomposition::max_residual() const {
  double worst = 0.0;
  for (const auto& s : steps) worst = std::max(worst, s.residual());
  return worst;
}

Decomposition decompose_action_errors(const MpcRollout& rollout,
                                      const OfflinePolicy& policy,
                                      const DisturbanceTrace& trace,
                                      const PredictionStream& preds) {
  if (!rollout.gains_retained()) {
    throw Error(ErrorCode::kConfig,
                "decomposition needs a rollout run with retain_gains");
  }
  const int T = policy.horizon();
  if (rollout.horizon() != T || trace.horizon() != T) {
    throw Error(ErrorCode::kInstanceMismatch, "rollout/policy horizon differ");
  }
  const LinearSystem& sys = policy.system();
  const Trajectory& traj = rollout.trajectory();
  const int W = rollout.window();

  Decomposition dec;
  dec.steps.reserve(static_cast<std::size_t>(T - 1));
  for (int t = 1; t <= T - 1; ++t) {
    const MpcStep& step = rollout.step(t);
    const Vector& x = traj.state(t);
    StepDecomposition s;
    s.t = t;
    s.action_error = traj.input(t) - policy.action(t, x, trace);
    s.truncation = Vector::Zero(sys.nu());
    s.prediction = Vector::Zero(sys.nu());
    s.approximation = (policy.pass().K(t) - step.Kbar) * x;
    for (int i = t; i <= step.last; ++i) {
      const Matrix& kbar = step.Kbar_d[static_cast<std::size_t>(i - t)];
      s.prediction -= kbar * (sys.Bd * preds.error(t, i));
      s.approximation += (policy.Kd(t, i) - kbar) * (sys.Bd * trace.d(i));
    }
    for (int i = t + W + 1; i <= T - 1; ++i) {
      s.truncation += policy.Kd(t, i) * (sys.Bd * trace.d(i));
    }
    dec.steps.push_back(std::move(s));
  }
  return dec;
}

void write_decomposition_csv(std::ostream& out, const Decomposition& dec) {
  if (dec.steps.empty()) return;
  const Eigen::Index m = dec.steps.front().action_error.size();
  out << "t";
  for (const char* name : {"error", "truncation", "prediction", "approximation"}) {
    for (Eigen::Index k = 1; k <= m; ++k) out << ',' << name << k;
  }
  out << '\n';
  for (const auto& s : dec.steps) {
    out << s.t;
    for (const Vector* v : {&s.action_error, &s.truncation, &s.prediction,
                            &s.approximation}) {
      for (Eigen::Index k = 0; k < m; ++k) out << ',' << format_double((*v)(k));
    }
    out << '\n';
  }
}

ExpansionMatrices::ExpansionMatrices(const MpcRollout& rollout,
                                     const OfflinePolicy& policy)
    : rollout_(rollout),
      policy_(policy),
      T_(policy.horizon()),
      W_(rollout.window()) {
  if (!rollout.gains_retained()) {
    throw Error(ErrorCode::kConfig,
                "expansion matrices need a rollout run with retain_gains");
  }
  if (rollout.horizon() != T_) {
    throw Error(ErrorCode::kInstanceMismatch, "rollout/policy horizon differ");
  }
  const LinearSystem& sys = policy.system();
  const Eigen::Index n = sys.n();
  phi_.resize(static_cast<std::size_t>(T_));
  for (int t = 1; t <= T_; ++t) {
    auto& row = phi_[static_cast<std::size_t>(t - 1)];
    row.resize(static_cast<std::size_t>(t));
    row[static_cast<std::size_t>(t - 1)] = Matrix::Identity(n, n);
    if (t == 1) continue;
    const Matrix closed = sys.A - sys.Bu * rollout.step(t - 1).Kbar;
    const auto& prev = phi_[static_cast<std::size_t>(t - 2)];
    for (int t0 = 1; t0 <= t - 1; ++t0) {
      row[static_cast<std::size_t>(t0 - 1)] =
          closed * prev[static_cast<std::size_t>(t0 - 1)];
    }
  }
}

const Matrix& ExpansionMatrices::phi_mpc(int t, int t0) const {
  if (t0 < 1 || t < t0 || t > T_) {
    throw Error(ErrorCode::kDomain, "Phi^MPC(" + std::to_string(t) + ", " +
                                        std::to_string(t0) + ") undefined");
  }
  return phi_[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(t0 - 1)];
}

const Matrix& ExpansionMatrices::kbar_d(int j, int i) const {
  const MpcStep& step = rollout_.step(j);
  if (i < j || i > step.last) {
    throw Error(ErrorCode::kDomain, "Kbar_" + std::to_string(j) + "^{d," +
                                        std::to_string(i) + "} outside window");
  }
  return step.Kbar_d[static_cast<std::size_t>(i - j)];
}

Matrix ExpansionMatrices::gain_gap(int t) const {
  return policy_.pass().K(t) - rollout_.step(t).Kbar;
}

Matrix ExpansionMatrices::M(int i, int t) const {
  const LinearSystem& sys = policy_.system();
  const Eigen::Index n = sys.n();
  Matrix out = Matrix::Zero(n, n);
  if (i < 1 || i > std::min(t + W_, T_ - 1)) return out;
  for (int j = std::max(1, i - W_); j <= std::min(t - 1, i); ++j) {
    Matrix inner = -sys.Bu * kbar_d(j, i);
    if (i == j) inner += Matrix::Identity(n, n);
    out += phi_mpc(t, j + 1) * inner;
  }
  return out;
}

Matrix ExpansionMatrices::N0(int t) const { return gain_gap(t) * phi_mpc(t, 1); }

Matrix ExpansionMatrices::N(int i, int t) const {
  Matrix out = gain_gap(t) * M(i, t);
  if (i >= t && i <= t + W_ && i <= T_ - 1) {
    out += policy_.Kd(t, i) - kbar_d(t, i);
  } else if (i > t + W_ && i <= T_ - 1) {
    out += policy_.Kd(t, i);
  }
  return out;
}

Matrix ExpansionMatrices::L(int i, int j, int t) const {
  if (j == t) return -kbar_d(t, i);
  if (j < 1 || j > t) {
    throw Error(ErrorCode::kDomain, "L_{(i,j)|t} needs 1 <= j <= t");
  }
  return -gain_gap(t) * phi_mpc(t, j + 1) * policy_.system().Bu * kbar_d(j, i);
}

Vector ExpansionMatrices::expand_state(int t, const DisturbanceTrace& trace,
                                       const PredictionStream& preds) const {
  const LinearSystem& sys = policy_.system();
  Vector x = phi_mpc(t, 1) * trace.x1();
  for (int i = 1; i <= std::min(t + W_, T_ - 1); ++i) {
    x += M(i, t) * (sys.Bd * trace.d(i));
  }
  for (int j = 1; j <= t - 1; ++j) {
    const Matrix lead = phi_mpc(t, j + 1) * sys.Bu;
    for (int i = j; i <= rollout_.step(j).last; ++i) {
      x -= lead * (kbar_d(j, i) * (sys.Bd * preds.error(j, i)));
    }
  }
  return x;
}

Vector ExpansionMatrices::reconstruct_action_error(
    int t, const DisturbanceTrace& trace, const PredictionStream& preds) const {
  const LinearSystem& sys = policy_.system();
  Vector du = N0(t) * trace.x1();
  for (int i = 1; i <= T_ - 1; ++i) du += N(i, t) * (sys.Bd * trace.d(i));
  for (int j = 1; j <= t; ++j) {
    for (int i = j; i <= rollout_.step(j).last; ++i) {
      du += L(i, j, t) * (sys.Bd * preds.error(j, i));
    }
  }
  return du;
}

double ExpansionMatrices::n0_profile(int t, double rho, double gamma) const {
  return std::pow(gamma, W_) * std::pow(rho, t - 1);
}

double ExpansionMatrices::n_profile(int i, int t, double rho,
                                    double gamma) const {
  if (i < t) return std::pow(gamma, W_) * std::pow(rho, t - i - 1);
  if (i <= t + W_) return std::pow(gamma, W_ - i + t) * std::pow(rho, i - t);
  return std::pow(rho, i - t);
}

double ExpansionMatrices::l_profile(int i, int j, int t, double rho,
                                    double gamma) const {
  if (j == t) return std::pow(rho, i - t);
  return std::pow(gamma, W_) * std::pow(rho, t - 2 * j + i - 1);
}

}  // namespace olqr
