#pragma once

#include <vector>

#include "olqr/model.hpp"

namespace olqr {

// [I; A; ...; A^{k-1}], a (k n) x n block column.
Matrix stacked_powers(const Matrix& A, int k);

// Value function of the disturbed problem written as a quadratic form in the
// stacked open-loop predictions y_t^{t:T}(x):
//   V_t*(x) = y_t^{t:T}(x)' V_t y_t^{t:T}(x),
//   V_T = Q_T,  V_t = blkdiag(Q_t, f_t(V_{t+1})),
//   f_t(X) = X - X 𝒜 B_u (R_t + B_u'𝒜'X𝒜B_u)^{-1} B_u'𝒜'X,  𝒜 = 𝒜^{(T-t)}.
// Used only as a cross-check; storage grows quadratically in T.
class LiftedSolution {
 public:
  LiftedSolution(LinearSystem sys, int horizon, std::vector<Matrix> V,
                 std::vector<Matrix> G);

  int horizon() const { return horizon_; }
  const Matrix& V(int t) const;  // 1 <= t <= T
  const Matrix& G(int t) const;  // 1 <= t <= T-1
  // Y_t = V_t 𝒜^{(T-t+1)}
  Matrix Y(int t) const;
  // 𝒜^{(T-t+1)'} V_t 𝒜^{(T-t+1)}, which should equal the Riccati P_t.
  Matrix projected_value(int t) const;

  // y_t^{t:T}(x): y^1 = x, y^{k+1} = A y^k + B_d d_{t+k-1}.
  Vector predictions(int t, const Vector& x, const DisturbanceTrace& trace) const;
  // -G_t y_t^{t+1:T}(x)
  Vector action(int t, const Vector& x, const DisturbanceTrace& trace) const;
  // y_t^{t:T}(x)' V_t y_t^{t:T}(x)
  double value(int t, const Vector& x, const DisturbanceTrace& trace) const;

 private:
  LinearSystem sys_;
  int horizon_;
  std::vector<Matrix> V_;
  std::vector<Matrix> G_;
};

// Throws Error(kSize) when T * n exceeds `max_dimension`.
LiftedSolution build_lifted(const LinearSystem& sys, const CostSchedule& costs,
                            int max_dimension = 4000);

}  // namespace olqr
