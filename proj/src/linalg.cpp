#include "olqr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "olqr/error.hpp"

namespace olqr {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimension: return "dimension";
    case ErrorCode::kHorizon: return "horizon";
    case ErrorCode::kSolver: return "solver";
    case ErrorCode::kDivergence: return "divergence";
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kBranch: return "branch";
    case ErrorCode::kStream: return "stream";
    case ErrorCode::kSize: return "size";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kInstanceMismatch: return "instance-mismatch";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kParse: return "parse";
  }
  return "unknown";
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double max_asymmetry(const Matrix& m) {
  if (m.rows() != m.cols()) return INFINITY;
  if (m.size() == 0) return 0.0;
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double lambda_min(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double lambda_max(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

bool loewner_leq(const Matrix& lower, const Matrix& upper, double tol) {
  return lambda_min(symmetrize(upper - lower)) >= -tol;
}

namespace {

template <typename Fn>
Matrix spectral_apply(const Matrix& sym, double floor, Fn fn) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(sym));
  Vector mapped = es.eigenvalues().unaryExpr(
      [&](double lam) { return fn(std::max(lam, floor)); });
  const Matrix& v = es.eigenvectors();
  return v * mapped.asDiagonal() * v.transpose();
}

}  // namespace

Matrix spd_sqrt(const Matrix& sym, double floor) {
  return spectral_apply(sym, floor, [](double x) { return std::sqrt(x); });
}

Matrix spd_inv_sqrt(const Matrix& sym, double floor) {
  return spectral_apply(sym, floor,
                        [](double x) { return 1.0 / std::sqrt(x); });
}

Matrix spd_log(const Matrix& sym, double floor) {
  return spectral_apply(sym, floor, [](double x) { return std::log(x); });
}

Matrix spd_solve(const Matrix& sym, const Matrix& rhs, double max_condition) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()(0);
  const double hi = es.eigenvalues()(es.eigenvalues().size() - 1);
  if (!(lo > 0.0) || hi / lo > max_condition) {
    std::ostringstream msg;
    msg << "matrix is numerically singular (lambda_min=" << lo
        << ", lambda_max=" << hi << ")";
    throw Error(ErrorCode::kSolver, msg.str());
  }
  return sym.llt().solve(rhs);
}

int numerical_rank(const Matrix& m, double relative_threshold) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  const double cut = relative_threshold * s(0);
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cut) ++rank;
  }
  return rank;
}

}  // namespace olqr
