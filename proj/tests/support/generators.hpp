#pragma once

#include <cstdint>
#include <random>

#include "olqr/linalg.hpp"
#include "olqr/model.hpp"

namespace olqr::testing {

inline Matrix random_orthogonal(std::mt19937_64& g, int n) {
  std::normal_distribution<double> N;
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = N(g);
  Eigen::HouseholderQR<Matrix> qr(m);
  return qr.householderQ();
}

// Symmetric with spectrum in [lo, hi].
inline Matrix random_spd(std::mt19937_64& g, int n, double lo, double hi) {
  std::uniform_real_distribution<double> U(lo, hi);
  const Matrix V = random_orthogonal(g, n);
  Vector eig(n);
  for (int i = 0; i < n; ++i) eig(i) = U(g);
  return symmetrize(V * eig.asDiagonal() * V.transpose());
}

// A random X with lower <= X <= upper in the Loewner order:
// X = lower + D^{1/2} V diag(u) V' D^{1/2}, D = upper - lower, u in [0,1].
inline Matrix random_between(std::mt19937_64& g, const Matrix& lower,
                             const Matrix& upper) {
  const Matrix root = spd_sqrt(symmetrize(upper - lower));
  const Matrix inner = random_spd(g, static_cast<int>(lower.rows()), 0.0, 1.0);
  return symmetrize(lower + root * inner * root);
}

inline Matrix random_matrix(std::mt19937_64& g, int rows, int cols,
                            double scale = 1.0) {
  std::normal_distribution<double> N(0.0, scale);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = N(g);
  return m;
}

inline Vector random_vector(std::mt19937_64& g, int n, double scale = 1.0) {
  return random_matrix(g, n, 1, scale);
}

inline Instance swap_instance(std::uint64_t seed, int T) {
  return generate_instance(seed, T, GeneratorProfile::swap());
}

// Random dynamics, non-diagonal costs, nonzero x_1.
inline Instance random_instance(std::uint64_t seed, int T) {
  return generate_instance(seed, T, GeneratorProfile::random_system());
}

inline LinearSystem scalar_system(double a, double b, double bd = 1.0) {
  return LinearSystem(Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, b),
                      Matrix::Constant(1, 1, bd));
}

inline CostSchedule constant_schedule(const Matrix& Q, const Matrix& R, int T,
                                      const Matrix& terminal) {
  std::vector<Matrix> q(static_cast<std::size_t>(T), Q);
  q.back() = terminal;
  std::vector<Matrix> r(static_cast<std::size_t>(T - 1), R);
  return CostSchedule(q, r);
}

}  // namespace olqr::testing
