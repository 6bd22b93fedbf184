#pragma once

#include <vector>

#include "olqr/model.hpp"
#include "olqr/offline.hpp"

namespace olqr {

// Minimizer of
//   sum_{k=0}^{N-1} (x_k'Q_k x_k + u_k'R_k u_k) + x_N' terminal x_N
//   s.t. x_{k+1} = A x_k + B_u u_k + B_d d_k,  x_0 given,
// found by eliminating the states and solving the normal equations of the
// resulting strictly convex quadratic in the stacked inputs.
Vector solve_input_qp(const LinearSystem& sys, const std::vector<Matrix>& Q,
                      const std::vector<Matrix>& R, const Matrix& terminal,
                      const Vector& x0, const std::vector<Vector>& d);

struct QpSolution {
  Vector u;  // stacked u_1..u_{T-1}
  double cost = 0.0;
  Trajectory trajectory;
};

// Full-horizon minimizer of the total cost. Throws Error(kSize) when
// (T-1) * n_u exceeds `max_variables`.
QpSolution qp_oracle(const LinearSystem& sys, const CostSchedule& costs,
                     const DisturbanceTrace& trace, int max_variables = 2000);

// Total cost as a function of stacked inputs, for gradient checks.
double cost_of_inputs(const LinearSystem& sys, const CostSchedule& costs,
                      const DisturbanceTrace& trace, const Vector& stacked_u);

}  // namespace olqr
