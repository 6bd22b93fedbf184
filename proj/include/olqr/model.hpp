#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "olqr/linalg.hpp"
#include "olqr/tolerances.hpp"

namespace olqr {

// x_{t+1} = A x_t + B_u u_t + B_d d_t
struct LinearSystem {
  Matrix A;
  Matrix Bu;
  Matrix Bd;

  // Throws Error(kDimension) naming the offending field.
  LinearSystem(Matrix a, Matrix bu, Matrix bd);

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index nu() const { return Bu.cols(); }
  Eigen::Index nd() const { return Bd.cols(); }
};

// Stage costs Q_1..Q_T (Q_T terminal) and R_1..R_{T-1}. Stage indices are
// 1-based throughout the library to match the usual t = 1..T convention.
class CostSchedule {
 public:
  CostSchedule(std::vector<Matrix> q, std::vector<Matrix> r);

  int horizon() const { return static_cast<int>(q_.size()); }
  const Matrix& Q(int t) const;
  const Matrix& R(int t) const;
  const Matrix& terminal() const { return q_.back(); }

  const std::vector<Matrix>& all_Q() const { return q_; }
  const std::vector<Matrix>& all_R() const { return r_; }

 private:
  std::vector<Matrix> q_;
  std::vector<Matrix> r_;
};

struct CostBounds {
  Matrix Q_min;
  Matrix Q_max;
  Matrix R_min;
  Matrix R_max;
};

// d_1..d_{T-1} and the initial state.
class DisturbanceTrace {
 public:
  DisturbanceTrace(std::vector<Vector> d, Vector x1);

  int horizon() const { return static_cast<int>(d_.size()) + 1; }
  const Vector& d(int t) const;
  const Vector& x1() const { return x1_; }
  const std::vector<Vector>& all() const { return d_; }

 private:
  std::vector<Vector> d_;
  Vector x1_;
};

// Lookahead values d_{i|t} for t <= i <= min(t + W, T - 1).
class PredictionStream {
 public:
  // predicted[t-1][k] holds d_{t+k|t}.
  PredictionStream(int window, const DisturbanceTrace& trace,
                   std::vector<std::vector<Vector>> predicted);

  static PredictionStream accurate(const DisturbanceTrace& trace, int window);

  int window() const { return window_; }
  int horizon() const { return horizon_; }
  int last_index(int t) const;  // min(t + W, T - 1)

  // Throws Error(kStream) outside the window.
  const Vector& predicted(int t, int i) const;
  // e_{i|t} = d_{i|t} - d_i
  const Vector& error(int t, int i) const;

  double max_abs_error() const;

 private:
  void check(int t, int i) const;

  int window_;
  int horizon_;
  std::vector<std::vector<Vector>> predicted_;
  std::vector<std::vector<Vector>> errors_;
};

struct NoiseSpec {
  enum class Kind { kAccurate, kIid, kDepthGrowing };
  Kind kind = Kind::kAccurate;
  // Noise amplitude ("snr"): larger means worse forecasts.
  double snr = 0.0;
  // kDepthGrowing: amplitude at depth k = i - t is snr * (1 + growth * k).
  double growth = 0.0;

  static NoiseSpec accurate() { return {}; }
  static NoiseSpec iid(double snr) { return {Kind::kIid, snr, 0.0}; }
  static NoiseSpec depth_growing(double snr, double growth) {
    return {Kind::kDepthGrowing, snr, growth};
  }
};

PredictionStream make_predictions(const DisturbanceTrace& trace, int window,
                                  const NoiseSpec& noise, std::uint64_t seed);

struct GeneratorProfile {
  enum class Kind { kSwap, kRandomSystem };
  Kind kind = Kind::kSwap;
  std::string name = "swap";
  double q_lo = 2.0, q_hi = 3.0;
  double r_lo = 5.0, r_hi = 6.0;
  double disturbance_std = 1.0;
  double x1_std = 0.0;
  // kRandomSystem only.
  int n = 2, nu = 1, nd = 1;
  double radius_lo = 0.6, radius_hi = 1.2;

  // A = [[0,1],[1,0]], B_u = B_d = [0;1], Q_t = q_t I, R_t = r_t.
  static GeneratorProfile swap();
  // Random (A, B_u, B_d) with spectral radius of A in [radius_lo, radius_hi]
  // and non-diagonal Q_t, R_t inside [q_lo I, q_hi I], [r_lo I, r_hi I].
  static GeneratorProfile random_system();
  // Looks up "swap" or "random".
  static GeneratorProfile by_name(const std::string& name);
};

struct Instance {
  LinearSystem sys;
  CostSchedule costs;
  CostBounds bounds;
  DisturbanceTrace trace;
  std::uint64_t seed = 0;
  std::string profile;
};

Instance generate_instance(std::uint64_t seed, int horizon,
                           const GeneratorProfile& profile);

struct ValidationCheck {
  std::string name;
  bool passed;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool ok() const;
  const ValidationCheck* find(const std::string& name) const;
};

ValidationReport validate_instance(const LinearSystem& sys,
                                   const CostSchedule& costs,
                                   const CostBounds& bounds,
                                   const Tolerances& tol = default_tolerances());

// Stabilizability of (A, B_u) via convergence of the DARE iteration at
// (Q, R) = (I, I).
bool is_stabilizable(const LinearSystem& sys,
                     const Tolerances& tol = default_tolerances());

// Rank of [Q^{1/2}; Q^{1/2} A; ...; Q^{1/2} A^{n-1}] equals n.
bool is_detectable(const Matrix& A, const Matrix& Q,
                   const Tolerances& tol = default_tolerances());

}  // namespace olqr
