#include "olqr/qp.hpp"

#include "olqr/error.hpp"

namespace olqr {

Vector solve_input_qp(const LinearSystem& sys, const std::vector<Matrix>& Q,
                      const std::vector<Matrix>& R, const Matrix& terminal,
                      const Vector& x0, const std::vector<Vector>& d) {
  const Eigen::Index N = static_cast<Eigen::Index>(R.size());
  if (static_cast<Eigen::Index>(Q.size()) != N ||
      static_cast<Eigen::Index>(d.size()) != N || N < 1) {
    throw Error(ErrorCode::kDimension, "QP stage data lengths disagree");
  }
  const Eigen::Index n = sys.n(), m = sys.nu();
  // Stacked x_1..x_N = free + Gu * u.
  Matrix Gu = Matrix::Zero(N * n, N * m);
  Vector free(N * n);
  Vector x = x0;
  for (Eigen::Index k = 0; k < N; ++k) {
    x = sys.A * x + sys.Bd * d[static_cast<std::size_t>(k)];
    free.segment(k * n, n) = x;
    // Column block j of row block k is A^{k-j} B_u.
    for (Eigen::Index j = 0; j <= k; ++j) {
      if (j == k) {
        Gu.block(k * n, j * m, n, m) = sys.Bu;
      } else {
        Gu.block(k * n, j * m, n, m) = sys.A * Gu.block((k - 1) * n, j * m, n, m);
      }
    }
  }
  Matrix Qblk = Matrix::Zero(N * n, N * n);
  for (Eigen::Index k = 0; k < N; ++k) {
    const Matrix& weight =
        (k + 1 < N) ? Q[static_cast<std::size_t>(k + 1)] : terminal;
    Qblk.block(k * n, k * n, n, n) = weight;
  }
  Matrix H = Gu.transpose() * Qblk * Gu;
  for (Eigen::Index k = 0; k < N; ++k) {
    H.block(k * m, k * m, m, m) += R[static_cast<std::size_t>(k)];
  }
  H = symmetrize(H);
  const Vector g = Gu.transpose() * (Qblk * free);
  Eigen::LLT<Matrix> llt(H);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kSolver, "QP Hessian is not positive definite");
  }
  return -llt.solve(g);
}

namespace {

Trajectory trajectory_of(const LinearSystem& sys, const CostSchedule& costs,
                         const DisturbanceTrace& trace, const Vector& stacked_u) {
  const Eigen::Index m = sys.nu();
  return simulate(sys, costs, trace, [&](int t, const Vector&) {
    return Vector(stacked_u.segment((t - 1) * m, m));
  });
}

}  // namespace

double cost_of_inputs(const LinearSystem& sys, const CostSchedule& costs,
                      const DisturbanceTrace& trace, const Vector& stacked_u) {
  return trajectory_of(sys, costs, trace, stacked_u).total_cost;
}

QpSolution qp_oracle(const LinearSystem& sys, const CostSchedule& costs,
                     const DisturbanceTrace& trace, int max_variables) {
  const int T = costs.horizon();
  if (trace.horizon() != T) {
    throw Error(ErrorCode::kDimension, "trace length must be T-1");
  }
  const long long vars = static_cast<long long>(T - 1) * sys.nu();
  if (vars > max_variables) {
    throw Error(ErrorCode::kSize, "QP oracle needs " + std::to_string(vars) +
                                      " variables > cap " +
                                      std::to_string(max_variables));
  }
  std::vector<Matrix> Q(costs.all_Q().begin(), costs.all_Q().end() - 1);
  const Vector u = solve_input_qp(sys, Q, costs.all_R(), costs.terminal(),
                                  trace.x1(), trace.all());
  QpSolution sol;
  sol.u = u;
  sol.trajectory = trajectory_of(sys, costs, trace, u);
  sol.cost = sol.trajectory.total_cost;
  return sol;
}

}  // namespace olqr
