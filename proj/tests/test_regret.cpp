#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "olqr/decomposition.hpp"
#include "olqr/error.hpp"
#include "olqr/regret.hpp"
#include "support/generators.hpp"

using namespace olqr;

namespace {

struct Case {
  Instance inst;
  StabilityConstants c;
  OfflinePolicy policy;
  PredictionStream preds;
  MpcRollout rollout;
};

Case make_case(const Instance& inst, int W, double snr) {
  StabilityConstants c = stability_constants(inst.sys, inst.bounds);
  OfflinePolicy policy = build_offline_policy(inst.sys, inst.costs);
  PredictionStream preds =
      make_predictions(inst.trace, W, snr > 0 ? NoiseSpec::iid(snr) : NoiseSpec::accurate(),
                       inst.seed + 1000);
  MpcRollout rollout = mpc_rollout(inst.sys, inst.costs, c.P_max, inst.trace, preds, W);
  return {inst, c, std::move(policy), std::move(preds), std::move(rollout)};
}

}  // namespace

TEST_CASE("part I coefficient") {
  // [2 (0.4^2 + 0.5^2) + 0.4 (0.5^2 - 0.4^2)/0.1]^2 = (0.82 + 0.36)^2
  CHECK(partI_coefficient(0.5, 0.4, 2) == doctest::Approx(1.3924).epsilon(1e-12));
  // rho == gamma uses W gamma^W
  const double g = 0.7;
  const double expect = std::pow(2 * std::pow(g, 3) / (1 - g) + 3 * std::pow(g, 3), 2);
  CHECK(partI_coefficient(g, g, 3) == doctest::Approx(expect).epsilon(1e-12));
  // and is continuous there
  CHECK(partI_coefficient(g + 1e-9, g, 3) == doctest::Approx(expect).epsilon(1e-7));

  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> U(0.01, 0.99);
  for (int k = 0; k < 200; ++k) {
    const double rho = U(gen), gamma = U(gen);
    double prev = partI_coefficient(rho, gamma, 1);
    for (int W = 2; W <= 30; ++W) {
      const double cur = partI_coefficient(rho, gamma, W);
      CHECK(cur < prev);
      prev = cur;
    }
  }
  double prev = partI_coefficient(0.9, 0.8, 1);
  for (int W = 2; W <= 50; ++W) {
    const double cur = partI_coefficient(0.9, 0.8, W);
    CHECK(cur < prev);
    prev = cur;
  }
  CHECK(prev < 0.1);
}

TEST_CASE("part II coefficient") {
  const double rho = 0.6, gamma = 0.3;
  for (int W : {0, 1, 5}) {
    const double gw = std::pow(gamma, W);
    CHECK(partII_coefficient(rho, gamma, W) ==
          doctest::Approx((1 / (1 - rho) + gw / (1 - rho * rho)) * (1 + gw / (1 - rho))));
  }
}

TEST_CASE("regret bound factors") {
  const Instance inst = testing::swap_instance(1, 40);
  const StabilityConstants c = stability_constants(inst.sys, inst.bounds);
  SUBCASE("accurate predictions have no part II energy") {
    const auto f = regret_bound(c, 4, inst.trace, PredictionStream::accurate(inst.trace, 4),
                                    inst.sys, inst.bounds);
    CHECK(f.energy_e == 0.0);
    CHECK(f.partII() == 0.0);
    double ed = 0.0;
    for (int t = 1; t <= 39; ++t) ed += inst.trace.d(t).squaredNorm();
    CHECK(f.energy_d == doctest::Approx(ed).epsilon(1e-14));
    CHECK(f.partI_coeff == partI_coefficient(c.rho, c.gamma, 4));
  }
  SUBCASE("noisy predictions weight depth by rho") {
    const auto preds = make_predictions(inst.trace, 3, NoiseSpec::iid(0.5), 2);
    const auto f = regret_bound(c, 3, inst.trace, preds, inst.sys, inst.bounds);
    double expect = 0.0;
    for (int j = 1; j <= 39; ++j)
      for (int i = j; i <= preds.last_index(j); ++i)
        expect += std::pow(c.rho, i - j) * (inst.sys.Bd * preds.error(j, i)).squaredNorm();
    CHECK(f.energy_e == doctest::Approx(expect).epsilon(1e-13));
  }
  SUBCASE("degenerate constants are rejected") {
    StabilityConstants bad = c;
    bad.rho = 1.0;
    CHECK_THROWS_AS(regret_bound(bad, 2, inst.trace, PredictionStream::accurate(inst.trace, 2),
                                     inst.sys, inst.bounds),
                    Error);
    bad = c;
    bad.gamma = 1.0;
    CHECK_THROWS_AS(regret_bound(bad, 2, inst.trace, PredictionStream::accurate(inst.trace, 2),
                                     inst.sys, inst.bounds),
                    Error);
  }
}

TEST_CASE("explicit constants") {
  const Instance inst = testing::swap_instance(1, 5);
  const StabilityConstants c = stability_constants(inst.sys, inst.bounds);
  const ExplicitConstants k = explicit_constants(c, inst.sys, inst.bounds);
  // Swap system: |B_u| = |A| = 1, B_u R_min^{-1} B_u' has norm 1/5.
  const double lp = c.lambda_max_P_max;
  CHECK(k.c1 == doctest::Approx(c.tau * lp / 5.0));
  CHECK(k.alpha4 == doctest::Approx(2.0 / 5.0 * std::pow(lp, 4) / 4.0 * 1.2 / (1 - c.gamma)));
  CHECK(k.alpha3 == doctest::Approx(k.alpha4));
  CHECK(k.c5 == doctest::Approx(0.2 * lp * c.tau * c.tau / (1 - c.rho * c.rho)));
  CHECK(k.c4 == doctest::Approx(k.c5 + c.tau));
}

TEST_CASE("regret formula equals the cost difference") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    for (int W : {0, 2, 5}) {
      for (double snr : {0.0, 0.3}) {
        const Instance inst = seed % 2 ? testing::random_instance(seed, 40)
                                       : testing::swap_instance(seed, 40);
        const Case k = make_case(inst, W, snr);
        const RegretReport r = dynamic_regret(k.rollout, k.policy, inst.trace, k.preds);
        const double scale = 1.0 + std::abs(r.J_star);
        CHECK(r.regret >= -1e-8 * scale);
        CHECK(std::abs(r.regret - r.regret_formula) <= 1e-8 * scale);
        CHECK(r.regret_formula == doctest::Approx(regret_formula(k.rollout.trajectory(), k.policy, inst.trace)));
      }
    }
  }
}

TEST_CASE("single deviation from the optimal policy") {
  const Instance inst = testing::random_instance(7, 30);
  const OfflinePolicy pol = build_offline_policy(inst.sys, inst.costs);
  const Vector delta = Vector::Constant(1, 0.37);
  const int s = 11;
  const Trajectory tr = simulate(inst.sys, inst.costs, inst.trace, [&](int t, const Vector& x) {
    Vector u = pol.action(t, x, inst.trace);
    if (t == s) u += delta;
    return u;
  });
  const double J_star = optimal_rollout(pol, inst.trace).total_cost;
  const double one_term = delta.dot(pol.pass().S(s) * delta);
  CHECK(regret_formula(tr, pol, inst.trace) == doctest::Approx(one_term).epsilon(1e-10));
  CHECK(tr.total_cost - J_star == doctest::Approx(one_term).epsilon(1e-8));
  CHECK(regret_formula(optimal_rollout(pol, inst.trace), pol, inst.trace) == 0.0);
}

TEST_CASE("regret vanishes in the trivial cases") {
  SUBCASE("window covers the horizon") {
    const Instance inst = testing::random_instance(3, 20);
    const Case k = make_case(inst, 19, 0.0);
    const RegretReport r = dynamic_regret(k.rollout, k.policy, inst.trace, k.preds);
    CHECK(std::abs(r.regret) <= 1e-9 * (1.0 + r.J_star));
    for (const auto& s : r.decomposition->steps) CHECK(s.truncation.isZero(0.0));
  }
  SUBCASE("no disturbance, zero start") {
    GeneratorProfile p = GeneratorProfile::swap();
    p.disturbance_std = 0.0;
    const Instance inst = generate_instance(4, 30, p);
    const Case k = make_case(inst, 3, 0.0);
    const RegretReport r = dynamic_regret(k.rollout, k.policy, inst.trace, k.preds);
    CHECK(r.J_pi == 0.0);
    CHECK(r.regret == 0.0);
  }
}

TEST_CASE("action-error decomposition") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const Instance inst = testing::random_instance(seed, 40);
    for (int W : {0, 3, 8}) {
      const Case k = make_case(inst, W, 0.4);
      const Decomposition d = decompose_action_errors(k.rollout, k.policy, inst.trace, k.preds);
      CHECK(d.max_residual() <= 1e-8);
      for (const auto& s : d.steps) {
        CHECK((s.action_error - (k.rollout.trajectory().input(s.t) -
                                 k.policy.action(s.t, k.rollout.trajectory().state(s.t), inst.trace)))
                  .norm() == 0.0);
        if (s.t > 40 - W - 1) CHECK(s.approximation.norm() <= 1e-10);
      }
    }
    const Case acc = make_case(inst, 4, 0.0);
    for (const auto& s : decompose_action_errors(acc.rollout, acc.policy, inst.trace, acc.preds).steps) {
      CHECK(s.prediction.isZero(0.0));
    }
  }
}

TEST_CASE("approximation error vanishes at the fixed point") {
  const Instance base = testing::random_instance(5, 30);
  const Matrix Pmax = solve_dare(base.bounds.Q_max, base.bounds.R_max, base.sys);
  const CostSchedule costs =
      testing::constant_schedule(base.bounds.Q_max, base.bounds.R_max, 30, Pmax);
  const OfflinePolicy pol = build_offline_policy(base.sys, costs);
  const PredictionStream preds = PredictionStream::accurate(base.trace, 4);
  const MpcRollout r = mpc_rollout(base.sys, costs, Pmax, base.trace, preds, 4);
  const Decomposition d = decompose_action_errors(r, pol, base.trace, preds);
  for (const auto& s : d.steps) {
    CHECK(s.approximation.norm() <= 1e-9);
    CHECK(s.prediction.isZero(0.0));
  }
}

TEST_CASE("decomposition needs retained gains") {
  const Instance inst = testing::swap_instance(1, 20);
  const auto preds = PredictionStream::accurate(inst.trace, 2);
  const MpcRollout r = mpc_rollout(inst.sys, inst.costs, inst.bounds, inst.trace, preds, 2,
                                   RolloutOptions{false});
  const OfflinePolicy pol = build_offline_policy(inst.sys, inst.costs);
  try {
    decompose_action_errors(r, pol, inst.trace, preds);
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConfig);
  }
  const RegretReport rep = dynamic_regret(r, pol, inst.trace, preds);
  CHECK_FALSE(rep.decomposition.has_value());
}

TEST_CASE("instance mismatch") {
  const Instance a = testing::swap_instance(1, 20);
  const Instance b = testing::swap_instance(1, 21);
  const auto preds = PredictionStream::accurate(a.trace, 2);
  const MpcRollout r = mpc_rollout(a.sys, a.costs, a.bounds, a.trace, preds, 2);
  const OfflinePolicy pol = build_offline_policy(b.sys, b.costs);
  try {
    dynamic_regret(r, pol, a.trace, preds);
    FAIL("expected a mismatch error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInstanceMismatch);
  }
}

TEST_CASE("trajectory expansion and the N, L matrices") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Instance inst = testing::random_instance(seed, 30);
    for (int W : {1, 4}) {
      const Case k = make_case(inst, W, 0.5);
      const ExpansionMatrices ex(k.rollout, k.policy);
      const ExplicitConstants cs = explicit_constants(k.c, inst.sys, inst.bounds);
      for (int t = 1; t <= 30; ++t) {
        const Vector x = k.rollout.trajectory().state(t);
        CHECK((ex.expand_state(t, inst.trace, k.preds) - x).norm() <= 1e-8 * (1.0 + x.norm()));
        CHECK((ex.phi_mpc(t, 1) - k.rollout.phi_mpc(t, 1)).norm() <= 1e-12);
        for (int i = 1; i <= std::min(t + W, 29); ++i) {
          const double m = spectral_norm(ex.M(i, t));
          if (i < t) CHECK(m <= cs.c4 * std::pow(k.c.rho, t - i - 1) + 1e-9);
          else CHECK(m <= cs.c5 * std::pow(k.c.rho, i - t + 1) + 1e-9);
        }
      }
      const Decomposition d = decompose_action_errors(k.rollout, k.policy, inst.trace, k.preds);
      for (int t = 1; t <= 29; ++t) {
        const Vector& du = d.steps[static_cast<std::size_t>(t - 1)].action_error;
        CHECK((ex.reconstruct_action_error(t, inst.trace, k.preds) - du).norm() <=
              1e-8 * (1.0 + du.norm()));
      }
    }
  }
}

TEST_CASE("gain differences obey the explicit constants") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Instance inst = testing::swap_instance(seed, 50);
    const StabilityConstants c = stability_constants(inst.sys, inst.bounds);
    const ExplicitConstants k = explicit_constants(c, inst.sys, inst.bounds);
    const OfflinePolicy pol = build_offline_policy(inst.sys, inst.costs);
    for (int W = 1; W <= 10; ++W) {
      for (int t = 1; t <= 50 - W - 1; ++t) {
        const MpcGains g = mpc_gains_at(t, inst.sys, inst.costs, c.P_max, W);
        CHECK(spectral_norm(pol.pass().K(t) - g.Kbar()) <= k.alpha3 * std::pow(c.gamma, W) + 1e-9);
        for (int i = t; i <= t + W; ++i) {
          CHECK(spectral_norm(pol.Kd(t, i) - g.Kbar_d(i)) <=
                k.alpha4 * std::pow(c.gamma, W - i + t) * std::pow(c.rho, i - t) + 1e-9);
        }
      }
    }
  }
}

TEST_CASE("quadratic-sum inequality") {
  CHECK(quadratic_sum_inequality_check(Matrix::Zero(3, 4), Vector::Random(4)));
  const auto one = quadratic_sum_inequality(Matrix::Constant(1, 1, 2.5), Vector::Constant(1, -1.5));
  CHECK(one.lhs == doctest::Approx(one.rhs).epsilon(1e-15));
  CHECK(one.holds);
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::normal_distribution<double> N;
  for (int k = 0; k < 1000; ++k) {
    const int rows = 1 + static_cast<int>(g() % 6), cols = 1 + static_cast<int>(g() % 6);
    Matrix a(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) a(i, j) = U(g) < 0.3 ? 0.0 : U(g);
    Vector y(cols);
    for (int j = 0; j < cols; ++j) y(j) = N(g);
    CHECK(quadratic_sum_inequality_check(a, y));
  }
  Matrix neg = Matrix::Ones(2, 2);
  neg(0, 1) = -0.1;
  try {
    quadratic_sum_inequality(neg, Vector::Ones(2));
    FAIL("expected a domain error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDomain);
  }
}

TEST_CASE("report writer") {
  const Instance inst = testing::swap_instance(1, 20);
  const Case k = make_case(inst, 3, 0.1);
  RegretOptions opt;
  opt.constants = k.c;
  opt.bounds = inst.bounds;
  const RegretReport r = dynamic_regret(k.rollout, k.policy, inst.trace, k.preds, opt);
  std::stringstream ss;
  write_report(ss, r);
  const std::string s = ss.str();
  for (const char* key : {"J_pi ", "J_star ", "regret ", "regret_formula ", "partI_coeff ",
                          "energy_e ", "alpha4 ", "decomposition_max_residual "}) {
    const bool present = s.rfind(key, 0) == 0 || s.find(std::string("\n") + key) != std::string::npos;
    CHECK(present);
  }
  std::stringstream csv;
  write_decomposition_csv(csv, *r.decomposition);
  std::string header;
  std::getline(csv, header);
  CHECK(header == "t,error1,truncation1,prediction1,approximation1");
}
