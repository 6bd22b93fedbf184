#pragma once

namespace olqr {

// Single place for every numeric threshold used by validation and checks.
struct Tolerances {
  double symmetry = 1e-12;          // max |X - X^T| accepted as symmetric
  double bounds_eig = 1e-10;        // lambda_min(U - X) >= -bounds_eig for X <= U
  double sandwich_eig = 1e-9;       // Q_min <= P_t <= P_max checks
  double singular_condition = 1e14; // cond(R + B'PB) above this is singular
  double rank_relative = 1e-9;      // sigma > rank_relative * sigma_max counts
  double eig_floor = 1e-300;        // floor for matrix log / inverse sqrt
  double dare_tol = 1e-12;
  int dare_max_iter = 100000;
  double atol = 1e-10;
  double rtol = 1e-8;

  double scaled(double magnitude) const { return atol + rtol * magnitude; }
};

inline const Tolerances& default_tolerances() {
  static const Tolerances tol{};
  return tol;
}

}  // namespace olqr
