#include "olqr/lifted.hpp"

#include "olqr/error.hpp"

namespace olqr {

Matrix stacked_powers(const Matrix& A, int k) {
  const Eigen::Index n = A.rows();
  Matrix out(k * n, n);
  Matrix power = Matrix::Identity(n, n);
  for (int j = 0; j < k; ++j) {
    out.middleRows(j * n, n) = power;
    power = A * power;
  }
  return out;
}

LiftedSolution::LiftedSolution(LinearSystem sys, int horizon,
                               std::vector<Matrix> V, std::vector<Matrix> G)
    : sys_(std::move(sys)), horizon_(horizon), V_(std::move(V)), G_(std::move(G)) {}

const Matrix& LiftedSolution::V(int t) const {
  if (t < 1 || t > horizon_) throw Error(ErrorCode::kDomain, "V_t index out of range");
  return V_[static_cast<std::size_t>(t - 1)];
}

const Matrix& LiftedSolution::G(int t) const {
  if (t < 1 || t > horizon_ - 1) throw Error(ErrorCode::kDomain, "G_t index out of range");
  return G_[static_cast<std::size_t>(t - 1)];
}

Matrix LiftedSolution::Y(int t) const {
  return V(t) * stacked_powers(sys_.A, horizon_ - t + 1);
}

Matrix LiftedSolution::projected_value(int t) const {
  const Matrix stack = stacked_powers(sys_.A, horizon_ - t + 1);
  return stack.transpose() * V(t) * stack;
}

Vector LiftedSolution::predictions(int t, const Vector& x,
                                   const DisturbanceTrace& trace) const {
  const Eigen::Index n = sys_.n();
  const int blocks = horizon_ - t + 1;
  Vector y(blocks * n);
  y.head(n) = x;
  for (int k = 1; k < blocks; ++k) {
    y.segment(k * n, n) =
        sys_.A * y.segment((k - 1) * n, n) + sys_.Bd * trace.d(t + k - 1);
  }
  return y;
}

Vector LiftedSolution::action(int t, const Vector& x,
                              const DisturbanceTrace& trace) const {
  const Vector y = predictions(t, x, trace);
  const Eigen::Index n = sys_.n();
  return -G(t) * y.tail(y.size() - n);
}

double LiftedSolution::value(int t, const Vector& x,
                             const DisturbanceTrace& trace) const {
  const Vector y = predictions(t, x, trace);
  return y.dot(V(t) * y);
}

LiftedSolution build_lifted(const LinearSystem& sys, const CostSchedule& costs,
                            int max_dimension) {
  const int T = costs.horizon();
  const Eigen::Index n = sys.n();
  if (static_cast<long long>(T) * n > max_dimension) {
    throw Error(ErrorCode::kSize,
                "lifted form needs dimension " + std::to_string(T * n) +
                    " > cap " + std::to_string(max_dimension));
  }
  std::vector<Matrix> V(static_cast<std::size_t>(T));
  std::vector<Matrix> G(static_cast<std::size_t>(T - 1));
  V[static_cast<std::size_t>(T - 1)] = costs.terminal();
  for (int t = T - 1; t >= 1; --t) {
    const Matrix& X = V[static_cast<std::size_t>(t)];
    const Matrix AB = stacked_powers(sys.A, T - t) * sys.Bu;
    const Matrix XAB = X * AB;
    const Matrix M = symmetrize(costs.R(t) + AB.transpose() * XAB);
    Matrix gain = spd_solve(M, XAB.transpose());
    const Matrix f = symmetrize(X - XAB * gain);
    Matrix Vt = Matrix::Zero(X.rows() + n, X.cols() + n);
    Vt.topLeftCorner(n, n) = costs.Q(t);
    Vt.bottomRightCorner(X.rows(), X.cols()) = f;
    V[static_cast<std::size_t>(t - 1)] = std::move(Vt);
    G[static_cast<std::size_t>(t - 1)] = std::move(gain);
  }
  return LiftedSolution(sys, T, std::move(V), std::move(G));
}

}  // namespace olqr
