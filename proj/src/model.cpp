#include "olqr/model.hpp"

#include <cmath>
#include <sstream>

#include "olqr/error.hpp"
#include "olqr/riccati.hpp"
#include "olqr/rng.hpp"

namespace olqr {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                   const std::string& field) {
  if (m.rows() != rows || m.cols() != cols) {
    throw Error(ErrorCode::kDimension,
                field + " has shape " + shape(m) + ", expected " +
                    std::to_string(rows) + "x" + std::to_string(cols));
  }
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace

LinearSystem::LinearSystem(Matrix a, Matrix bu, Matrix bd)
    : A(std::move(a)), Bu(std::move(bu)), Bd(std::move(bd)) {
  if (A.rows() < 1 || A.rows() != A.cols()) {
    throw Error(ErrorCode::kDimension, "A must be square with n >= 1, got " +
                                           shape(A));
  }
  if (Bu.rows() != A.rows() || Bu.cols() < 1) {
    throw Error(ErrorCode::kDimension,
                "B_u has shape " + shape(Bu) + ", expected " +
                    std::to_string(A.rows()) + "xn_u with n_u >= 1");
  }
  if (Bd.rows() != A.rows() || Bd.cols() < 1) {
    throw Error(ErrorCode::kDimension,
                "B_d has shape " + shape(Bd) + ", expected " +
                    std::to_string(A.rows()) + "xn_d with n_d >= 1");
  }
  if (!all_finite(A) || !all_finite(Bu) || !all_finite(Bd)) {
    throw Error(ErrorCode::kDomain, "system matrices must be finite");
  }
}

CostSchedule::CostSchedule(std::vector<Matrix> q, std::vector<Matrix> r)
    : q_(std::move(q)), r_(std::move(r)) {
  if (q_.size() < 2) {
    throw Error(ErrorCode::kHorizon, "cost schedule needs T >= 2 (got " +
                                         std::to_string(q_.size()) + ")");
  }
  if (r_.size() + 1 != q_.size()) {
    throw Error(ErrorCode::kDimension,
                "R has " + std::to_string(r_.size()) +
                    " entries, expected T-1 = " +
                    std::to_string(q_.size() - 1));
  }
  const Eigen::Index n = q_[0].rows();
  for (std::size_t k = 0; k < q_.size(); ++k) {
    require_shape(q_[k], n, n, "Q_" + std::to_string(k + 1));
  }
  const Eigen::Index nu = r_.empty() ? 0 : r_[0].rows();
  for (std::size_t k = 0; k < r_.size(); ++k) {
    require_shape(r_[k], nu, nu, "R_" + std::to_string(k + 1));
  }
}

const Matrix& CostSchedule::Q(int t) const {
  if (t < 1 || t > horizon()) {
    throw Error(ErrorCode::kDomain, "Q_" + std::to_string(t) +
                                        " outside 1.." +
                                        std::to_string(horizon()));
  }
  return q_[static_cast<std::size_t>(t - 1)];
}

const Matrix& CostSchedule::R(int t) const {
  if (t < 1 || t > horizon() - 1) {
    throw Error(ErrorCode::kDomain, "R_" + std::to_string(t) +
                                        " outside 1.." +
                                        std::to_string(horizon() - 1));
  }
  return r_[static_cast<std::size_t>(t - 1)];
}

DisturbanceTrace::DisturbanceTrace(std::vector<Vector> d, Vector x1)
    : d_(std::move(d)), x1_(std::move(x1)) {
  if (d_.empty()) {
    throw Error(ErrorCode::kHorizon, "trace needs T-1 >= 1 disturbances");
  }
  const Eigen::Index nd = d_[0].size();
  for (std::size_t k = 0; k < d_.size(); ++k) {
    if (d_[k].size() != nd) {
      throw Error(ErrorCode::kDimension,
                  "d_" + std::to_string(k + 1) + " has dimension " +
                      std::to_string(d_[k].size()) + ", expected " +
                      std::to_string(nd));
    }
    if (!d_[k].allFinite()) {
      throw Error(ErrorCode::kDomain,
                  "d_" + std::to_string(k + 1) + " is not finite");
    }
  }
  if (!x1_.allFinite()) {
    throw Error(ErrorCode::kDomain, "x1 is not finite");
  }
}

const Vector& DisturbanceTrace::d(int t) const {
  if (t < 1 || t > horizon() - 1) {
    throw Error(ErrorCode::kDomain, "d_" + std::to_string(t) +
                                        " outside 1.." +
                                        std::to_string(horizon() - 1));
  }
  return d_[static_cast<std::size_t>(t - 1)];
}

PredictionStream::PredictionStream(int window, const DisturbanceTrace& trace,
                                   std::vector<std::vector<Vector>> predicted)
    : window_(window),
      horizon_(trace.horizon()),
      predicted_(std::move(predicted)) {
  if (window_ < 0) {
    throw Error(ErrorCode::kDomain, "prediction window must be >= 0");
  }
  if (static_cast<int>(predicted_.size()) != horizon_ - 1) {
    throw Error(ErrorCode::kDimension,
                "prediction stream needs one entry per stage 1..T-1");
  }
  errors_.resize(predicted_.size());
  for (int t = 1; t <= horizon_ - 1; ++t) {
    auto& row = predicted_[static_cast<std::size_t>(t - 1)];
    const int count = last_index(t) - t + 1;
    if (static_cast<int>(row.size()) != count) {
      throw Error(ErrorCode::kDimension,
                  "stage " + std::to_string(t) + " has " +
                      std::to_string(row.size()) + " predictions, expected " +
                      std::to_string(count));
    }
    auto& err = errors_[static_cast<std::size_t>(t - 1)];
    err.reserve(row.size());
    for (int i = t; i <= last_index(t); ++i) {
      const Vector& p = row[static_cast<std::size_t>(i - t)];
      if (p.size() != trace.d(i).size()) {
        throw Error(ErrorCode::kDimension,
                    "d_{" + std::to_string(i) + "|" + std::to_string(t) +
                        "} has wrong dimension");
      }
      err.push_back(p - trace.d(i));
    }
  }
}

PredictionStream PredictionStream::accurate(const DisturbanceTrace& trace,
                                            int window) {
  return make_predictions(trace, window, NoiseSpec::accurate(), 0);
}

int PredictionStream::last_index(int t) const {
  return std::min(t + window_, horizon_ - 1);
}

void PredictionStream::check(int t, int i) const {
  if (t < 1 || t > horizon_ - 1 || i < t || i > last_index(t)) {
    throw Error(ErrorCode::kStream,
                "prediction d_{" + std::to_string(i) + "|" +
                    std::to_string(t) + "} is outside the window (W=" +
                    std::to_string(window_) + ")");
  }
}

const Vector& PredictionStream::predicted(int t, int i) const {
  check(t, i);
  return predicted_[static_cast<std::size_t>(t - 1)]
                   [static_cast<std::size_t>(i - t)];
}

const Vector& PredictionStream::error(int t, int i) const {
  check(t, i);
  return errors_[static_cast<std::size_t>(t - 1)]
                [static_cast<std::size_t>(i - t)];
}

double PredictionStream::max_abs_error() const {
  double worst = 0.0;
  for (const auto& row : errors_) {
    for (const auto& e : row) {
      if (e.size() > 0) worst = std::max(worst, e.cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

PredictionStream make_predictions(const DisturbanceTrace& trace, int window,
                                  const NoiseSpec& noise, std::uint64_t seed) {
  if (window < 0) {
    throw Error(ErrorCode::kDomain, "prediction window must be >= 0");
  }
  if (noise.snr < 0.0 || noise.growth < 0.0) {
    throw Error(ErrorCode::kDomain, "noise amplitude must be >= 0");
  }
  const int T = trace.horizon();
  const CounterRng rng(seed, Stream::kPredictionNoise);
  std::vector<std::vector<Vector>> predicted(static_cast<std::size_t>(T - 1));
  for (int t = 1; t <= T - 1; ++t) {
    const int last = std::min(t + window, T - 1);
    auto& row = predicted[static_cast<std::size_t>(t - 1)];
    row.reserve(static_cast<std::size_t>(last - t + 1));
    for (int i = t; i <= last; ++i) {
      Vector p = trace.d(i);
      double amplitude = 0.0;
      switch (noise.kind) {
        case NoiseSpec::Kind::kAccurate: break;
        case NoiseSpec::Kind::kIid: amplitude = noise.snr; break;
        case NoiseSpec::Kind::kDepthGrowing:
          amplitude = noise.snr * (1.0 + noise.growth * (i - t));
          break;
      }
      if (amplitude > 0.0) {
        // Draws are keyed by the pair (t, i) alone, so the noise seen at a
        // given pair does not depend on W or on the amplitude.
        const std::uint64_t pair =
            (static_cast<std::uint64_t>(t) << 32) | static_cast<std::uint64_t>(i);
        for (Eigen::Index k = 0; k < p.size(); ++k) {
          p(k) += amplitude *
                  rng.gaussian(pair * static_cast<std::uint64_t>(p.size()) +
                               static_cast<std::uint64_t>(k));
        }
      }
      row.push_back(std::move(p));
    }
  }
  return PredictionStream(window, trace, std::move(predicted));
}

GeneratorProfile GeneratorProfile::swap() { return GeneratorProfile{}; }

GeneratorProfile GeneratorProfile::random_system() {
  GeneratorProfile p;
  p.kind = Kind::kRandomSystem;
  p.name = "random";
  p.q_lo = 1.0;
  p.q_hi = 3.0;
  p.r_lo = 1.0;
  p.r_hi = 4.0;
  p.x1_std = 1.0;
  return p;
}

GeneratorProfile GeneratorProfile::by_name(const std::string& name) {
  if (name == "swap") return swap();
  if (name == "random") return random_system();
  throw Error(ErrorCode::kConfig, "unknown generator profile '" + name + "'");
}

namespace {

Matrix gaussian_matrix(const CounterRng& rng, std::uint64_t base,
                       Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  std::uint64_t k = base;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.gaussian(k++);
  }
  return m;
}

// lo*I + (hi - lo) * V diag(u) V' with u ~ Unif[0,1] and V orthogonal.
Matrix random_in_interval(const CounterRng& shape_rng, std::uint64_t base,
                          Eigen::Index dim, double lo, double hi) {
  const Matrix g = gaussian_matrix(shape_rng, base, dim, dim);
  const Matrix V = Eigen::HouseholderQR<Matrix>(g).householderQ() *
                   Matrix::Identity(dim, dim);
  Vector u(dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    u(k) = shape_rng.uniform(base + static_cast<std::uint64_t>(dim * dim + k));
  }
  Matrix out = lo * Matrix::Identity(dim, dim) +
               (hi - lo) * V * u.asDiagonal() * V.transpose();
  return symmetrize(out);
}

double spectral_radius(const Matrix& A) {
  Eigen::EigenSolver<Matrix> es(A, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

Instance generate_instance(std::uint64_t seed, int horizon,
                           const GeneratorProfile& profile) {
  if (horizon < 2) {
    throw Error(ErrorCode::kHorizon,
                "horizon must be >= 2 (got " + std::to_string(horizon) + ")");
  }
  const CounterRng q_rng(seed, Stream::kCostQ);
  const CounterRng r_rng(seed, Stream::kCostR);
  const CounterRng d_rng(seed, Stream::kDisturbance);
  const CounterRng x_rng(seed, Stream::kInitialState);
  const std::size_t T = static_cast<std::size_t>(horizon);

  std::vector<Matrix> Q;
  std::vector<Matrix> R;
  Q.reserve(T);
  R.reserve(T - 1);

  Matrix A, Bu, Bd;
  CostBounds bounds;
  if (profile.kind == GeneratorProfile::Kind::kSwap) {
    A = Matrix{{0.0, 1.0}, {1.0, 0.0}};
    Bu = Matrix{{0.0}, {1.0}};
    Bd = Matrix{{0.0}, {1.0}};
    const Matrix I = Matrix::Identity(2, 2);
    for (std::size_t t = 1; t <= T; ++t) {
      Q.push_back(q_rng.uniform(t, profile.q_lo, profile.q_hi) * I);
    }
    for (std::size_t t = 1; t + 1 <= T; ++t) {
      R.push_back(Matrix::Constant(1, 1,
                                   r_rng.uniform(t, profile.r_lo, profile.r_hi)));
    }
  } else {
    const CounterRng sys_rng(seed, Stream::kSystem);
    const CounterRng shape_rng(seed, Stream::kCostShape);
    const Eigen::Index n = profile.n, nu = profile.nu, nd = profile.nd;
    if (n < 1 || nu < 1 || nd < 1) {
      throw Error(ErrorCode::kDimension, "profile dimensions must be >= 1");
    }
    Matrix G = gaussian_matrix(sys_rng, 0, n, n);
    const double radius = spectral_radius(G);
    const double target =
        sys_rng.uniform(1u << 20, profile.radius_lo, profile.radius_hi);
    A = G * (target / std::max(radius, 1e-12));
    Bu = gaussian_matrix(sys_rng, 1u << 21, n, nu);
    Bd = gaussian_matrix(sys_rng, 1u << 22, n, nd);
    const std::uint64_t block = static_cast<std::uint64_t>(
        2 * (std::max(n, nu) * std::max(n, nu) + std::max(n, nu)));
    for (std::size_t t = 1; t <= T; ++t) {
      Q.push_back(random_in_interval(shape_rng, 2 * t * block, n,
                                     profile.q_lo, profile.q_hi));
    }
    for (std::size_t t = 1; t + 1 <= T; ++t) {
      R.push_back(random_in_interval(shape_rng, (2 * t + 1) * block, nu,
                                     profile.r_lo, profile.r_hi));
    }
  }
  const Eigen::Index n = A.rows(), nu = Bu.cols(), nd = Bd.cols();
  bounds.Q_min = profile.q_lo * Matrix::Identity(n, n);
  bounds.Q_max = profile.q_hi * Matrix::Identity(n, n);
  bounds.R_min = profile.r_lo * Matrix::Identity(nu, nu);
  bounds.R_max = profile.r_hi * Matrix::Identity(nu, nu);

  std::vector<Vector> d;
  d.reserve(T - 1);
  for (std::size_t t = 1; t + 1 <= T; ++t) {
    Vector v = Vector::Zero(nd);
    if (profile.disturbance_std > 0.0) {
      for (Eigen::Index k = 0; k < nd; ++k) {
        v(k) = profile.disturbance_std *
               d_rng.gaussian((t - 1) * static_cast<std::uint64_t>(nd) +
                              static_cast<std::uint64_t>(k));
      }
    }
    d.push_back(std::move(v));
  }
  Vector x1 = Vector::Zero(n);
  if (profile.x1_std > 0.0) {
    for (Eigen::Index k = 0; k < n; ++k) {
      x1(k) = profile.x1_std * x_rng.gaussian(static_cast<std::uint64_t>(k));
    }
  }

  return Instance{LinearSystem(A, Bu, Bd),
                  CostSchedule(std::move(Q), std::move(R)),
                  bounds,
                  DisturbanceTrace(std::move(d), std::move(x1)),
                  seed,
                  profile.name};
}

bool ValidationReport::ok() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

const ValidationCheck* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

bool is_stabilizable(const LinearSystem& sys, const Tolerances& tol) {
  const Matrix I_n = Matrix::Identity(sys.n(), sys.n());
  const Matrix I_u = Matrix::Identity(sys.nu(), sys.nu());
  try {
    solve_dare(I_n, I_u, sys, tol.dare_tol, tol.dare_max_iter);
    return true;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kDivergence || e.code() == ErrorCode::kSolver) {
      return false;
    }
    throw;
  }
}

bool is_detectable(const Matrix& A, const Matrix& Q, const Tolerances& tol) {
  const Eigen::Index n = A.rows();
  const Matrix root = spd_sqrt(Q, 0.0);
  Matrix stacked(n * n, n);
  Matrix power = Matrix::Identity(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    stacked.middleRows(k * n, n) = root * power;
    power = power * A;
  }
  return numerical_rank(stacked, tol.rank_relative) == n;
}

ValidationReport validate_instance(const LinearSystem& sys,
                                   const CostSchedule& costs,
                                   const CostBounds& bounds,
                                   const Tolerances& tol) {
  const Eigen::Index n = sys.n(), nu = sys.nu();
  for (int t = 1; t <= costs.horizon(); ++t) {
    require_shape(costs.Q(t), n, n, "Q_" + std::to_string(t));
  }
  for (int t = 1; t <= costs.horizon() - 1; ++t) {
    require_shape(costs.R(t), nu, nu, "R_" + std::to_string(t));
  }
  require_shape(bounds.Q_min, n, n, "Q_min");
  require_shape(bounds.Q_max, n, n, "Q_max");
  require_shape(bounds.R_min, nu, nu, "R_min");
  require_shape(bounds.R_max, nu, nu, "R_max");

  ValidationReport report;
  auto add = [&](std::string name, bool passed, std::string detail) {
    report.checks.push_back({std::move(name), passed, std::move(detail)});
  };
  auto first_failure = [&](auto&& pred, int lo, int hi,
                           const char* label) -> std::string {
    for (int t = lo; t <= hi; ++t) {
      if (!pred(t)) return std::string(label) + std::to_string(t);
    }
    return {};
  };

  const int T = costs.horizon();
  std::string bad;

  bad = first_failure(
      [&](int t) { return max_asymmetry(costs.Q(t)) <= tol.symmetry; }, 1, T,
      "Q_");
  add("Q_symmetric", bad.empty(), bad.empty() ? "" : bad + " asymmetric");
  bad = first_failure(
      [&](int t) { return max_asymmetry(costs.R(t)) <= tol.symmetry; }, 1,
      T - 1, "R_");
  add("R_symmetric", bad.empty(), bad.empty() ? "" : bad + " asymmetric");

  bad = first_failure(
      [&](int t) { return lambda_min(symmetrize(costs.Q(t))) > 0.0; }, 1, T,
      "Q_");
  add("Q_positive_definite", bad.empty(),
      bad.empty() ? "" : bad + " not positive definite");
  bad = first_failure(
      [&](int t) { return lambda_min(symmetrize(costs.R(t))) > 0.0; }, 1,
      T - 1, "R_");
  add("R_positive_definite", bad.empty(),
      bad.empty() ? "" : bad + " not positive definite");

  const bool bounds_pd = lambda_min(symmetrize(bounds.Q_min)) > 0.0 &&
                         lambda_min(symmetrize(bounds.R_min)) > 0.0;
  add("bounds_positive_definite", bounds_pd,
      bounds_pd ? "" : "Q_min or R_min not positive definite");

  bad = first_failure(
      [&](int t) {
        return loewner_leq(bounds.Q_min, costs.Q(t), tol.bounds_eig) &&
               loewner_leq(costs.Q(t), bounds.Q_max, tol.bounds_eig);
      },
      1, T, "Q_");
  add("Q_within_bounds", bad.empty(),
      bad.empty() ? "" : bad + " outside [Q_min, Q_max]");
  bad = first_failure(
      [&](int t) {
        return loewner_leq(bounds.R_min, costs.R(t), tol.bounds_eig) &&
               loewner_leq(costs.R(t), bounds.R_max, tol.bounds_eig);
      },
      1, T - 1, "R_");
  add("R_within_bounds", bad.empty(),
      bad.empty() ? "" : bad + " outside [R_min, R_max]");

  const bool stabilizable = is_stabilizable(sys, tol);
  add("stabilizable", stabilizable,
      stabilizable ? "" : "DARE iteration at (I, I) did not converge");

  bad = first_failure([&](int t) { return is_detectable(sys.A, costs.Q(t), tol); },
                      1, T, "Q_");
  add("detectable", bad.empty(),
      bad.empty() ? "" : "(A, " + bad + ") not detectable");
  return report;
}

}  // namespace olqr
