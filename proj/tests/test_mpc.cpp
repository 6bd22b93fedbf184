#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "olqr/error.hpp"
#include "olqr/harness.hpp"
#include "olqr/mpc.hpp"
#include "olqr/regret.hpp"
#include "support/generators.hpp"

using namespace olqr;

TEST_CASE("single-step window") {
  const Instance inst = testing::random_instance(2, 20);
  const Matrix Pmax = solve_dare(inst.bounds.Q_max, inst.bounds.R_max, inst.sys);
  const MpcGains g = mpc_gains_at(4, inst.sys, inst.costs, Pmax, 0);
  const Matrix S = inst.costs.R(4) + inst.sys.Bu.transpose() * Pmax * inst.sys.Bu;
  CHECK((g.Kbar() - feedback_gain(inst.costs.R(4), Pmax, inst.sys)).norm() <= 1e-12);
  CHECK((g.Kbar_d(4) - S.inverse() * inst.sys.Bu.transpose() * Pmax).norm() <= 1e-10);
  CHECK(g.Pbar(5) == Pmax);
  CHECK_THROWS_AS(g.Kbar_d(5), Error);
}

TEST_CASE("constant costs at the upper bound keep Pbar at P_max") {
  const Instance inst = testing::random_instance(3, 5);
  const CostSchedule costs =
      testing::constant_schedule(inst.bounds.Q_max, inst.bounds.R_max, 40, inst.bounds.Q_max);
  const Matrix Pmax = solve_dare(inst.bounds.Q_max, inst.bounds.R_max, inst.sys);
  const MpcGains g = mpc_gains_at(3, inst.sys, costs, Pmax, 6);
  for (int s = 3; s <= 10; ++s) CHECK((g.Pbar(s) - Pmax).norm() <= 1e-10);
}

TEST_CASE("windowed regime only") {
  const Instance inst = testing::swap_instance(1, 20);
  const Matrix Pmax = solve_dare(inst.bounds.Q_max, inst.bounds.R_max, inst.sys);
  CHECK_NOTHROW(mpc_gains_at(14, inst.sys, inst.costs, Pmax, 5));
  try {
    mpc_gains_at(15, inst.sys, inst.costs, Pmax, 5);
    FAIL("expected a branch error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBranch);
    CHECK(std::string(e.what()).find("exact-tail") != std::string::npos);
  }
  CHECK(branch_at(14, 20, 5) == Branch::kWindowed);
  CHECK(branch_at(15, 20, 5) == Branch::kExactTail);
}

TEST_CASE("MPC gain bounds on swap instances") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Instance inst = testing::swap_instance(seed, 60);
    const StabilityConstants c = stability_constants(inst.sys, inst.bounds);
    const ExplicitConstants k = explicit_constants(c, inst.sys, inst.bounds);
    const BackwardPass pass = backward_pass(inst.costs, inst.costs.terminal(), inst.sys);
    const int W = 10;
    for (int t = 1; t <= 60 - W - 1; ++t) {
      const MpcGains g = mpc_gains_at(t, inst.sys, inst.costs, c.P_max, W);
      CHECK(g.Pbar(t + W + 1) == c.P_max);
      for (int i = t; i <= t + W; ++i) {
        // windowed value decays toward the offline one away from the terminal
        CHECK(spectral_norm(g.Pbar(i + 1) - pass.P(i + 1)) <=
              std::pow(c.gamma, t + W - i) * k.value_gap + 1e-9);
        CHECK(loewner_leq(inst.bounds.Q_min, g.Pbar(i), 1e-9));
        CHECK(loewner_leq(g.Pbar(i), c.P_max, 1e-9));
        CHECK(spectral_norm(g.Kbar_d(i)) <= k.c1 * std::pow(c.rho, i - t) + 1e-9);
      }
      for (int from = t; from <= t + W + 1; ++from) {
        for (int to = from; to <= t + W + 1; ++to) {
          CHECK(spectral_norm(g.phibar(to, from)) <= c.tau * std::pow(c.rho, to - from) + 1e-9);
        }
      }
    }
  }
}

TEST_CASE("closed form and direct QP agree") {
  std::mt19937_64 gen(5);
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Instance inst = testing::random_instance(seed, 30);
    const Matrix Pmax = solve_dare(inst.bounds.Q_max, inst.bounds.R_max, inst.sys);
    for (int W : {0, 1, 4, 9}) {
      const auto preds = make_predictions(inst.trace, W, NoiseSpec::iid(0.5), seed);
      for (int trial = 0; trial < 10; ++trial) {
        const int t = 1 + static_cast<int>(gen() % 29);
        const Vector x = testing::random_vector(gen, 2, 3.0);
        const Vector qp = mpc_qp_crosscheck(t, x, preds, inst.sys, inst.costs, Pmax, W);
        Vector closed;
        if (branch_at(t, 30, W) == Branch::kWindowed) {
          closed = mpc_action(t, x, preds, mpc_gains_at(t, inst.sys, inst.costs, Pmax, W), inst.sys);
        } else {
          const BackwardPass tail = backward_pass(inst.costs, t, 29, inst.costs.terminal(),
                                                  inst.sys, BackwardPass::Source::kOffline);
          const auto row = feedforward_row(tail, inst.sys, t);
          closed = -tail.K(t) * x;
          for (int i = t; i <= 29; ++i) {
            closed -= row[static_cast<std::size_t>(i - t)] * (inst.sys.Bd * preds.predicted(t, i));
          }
        }
        CHECK((qp - closed).norm() <= 1e-8 * (1.0 + closed.norm()));
      }
    }
  }
}

TEST_CASE("zero state and zero predictions give zero input") {
  const Instance inst = testing::swap_instance(1, 20);
  const Matrix Pmax = solve_dare(inst.bounds.Q_max, inst.bounds.R_max, inst.sys);
  const DisturbanceTrace zeros(std::vector<Vector>(19, Vector::Zero(1)), Vector::Zero(2));
  const PredictionStream preds = PredictionStream::accurate(zeros, 3);
  const MpcGains g = mpc_gains_at(2, inst.sys, inst.costs, Pmax, 3);
  CHECK(mpc_action(2, Vector::Zero(2), preds, g, inst.sys).isZero(0.0));
  CHECK(mpc_qp_crosscheck(2, Vector::Zero(2), preds, inst.sys, inst.costs, Pmax, 3).norm() <= 1e-15);
}

TEST_CASE("a window covering the horizon reproduces the optimal rollout") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Instance inst = testing::random_instance(seed, 25);
    const PredictionStream preds = PredictionStream::accurate(inst.trace, 24);
    const MpcRollout r = mpc_rollout(inst.sys, inst.costs, inst.bounds, inst.trace, preds, 24);
    const Trajectory opt = optimal_rollout(build_offline_policy(inst.sys, inst.costs), inst.trace);
    for (const MpcStep& s : r.steps()) CHECK(s.branch == Branch::kExactTail);
    for (int t = 1; t <= 24; ++t) {
      CHECK((r.trajectory().input(t) - opt.input(t)).norm() <= 1e-10);
    }
    CHECK(r.trajectory().total_cost - opt.total_cost <= 1e-9 * (1.0 + opt.total_cost));
  }
}

TEST_CASE("branch partition and closed-loop stability") {
  const Instance inst = testing::swap_instance(2, 60);
  const StabilityConstants c = stability_constants(inst.sys, inst.bounds);
  const int W = 5;
  const auto preds = make_predictions(inst.trace, W, NoiseSpec::iid(0.3), 3);
  const MpcRollout r = mpc_rollout(inst.sys, inst.costs, c.P_max, inst.trace, preds, W);
  for (int t = 1; t <= 59; ++t) {
    CHECK((r.step(t).branch == Branch::kExactTail) == (t > 60 - W - 1));
    CHECK(r.step(t).gains.has_value() == (t <= 60 - W - 1));
    CHECK(r.step(t).last == std::min(t + W, 59));
  }
  for (int t0 = 1; t0 <= 60; ++t0) {
    for (int t = t0; t <= 60; ++t) {
      CHECK(spectral_norm(r.phi_mpc(t, t0)) <= c.tau * std::pow(c.rho, t - t0) + 1e-9);
    }
  }
  // With |B_d d| <= D and the window gains bounded by c1 rho^k, the state
  // obeys |x_t| <= tau |x_1| + C D with
  // C = tau/(1-rho) (1 + |B_u| c1/(1-rho)).
  const ExplicitConstants k = explicit_constants(c, inst.sys, inst.bounds);
  double D = 0.0;
  for (int t = 1; t <= 59; ++t) {
    D = std::max(D, (inst.sys.Bd * inst.trace.d(t)).norm());
    for (int i = t; i <= preds.last_index(t); ++i) {
      D = std::max(D, (inst.sys.Bd * preds.predicted(t, i)).norm());
    }
  }
  const double C = c.tau / (1.0 - c.rho) * (1.0 + spectral_norm(inst.sys.Bu) * k.c1 / (1.0 - c.rho));
  for (int t = 1; t <= 60; ++t) {
    CHECK(r.trajectory().state(t).norm() <= c.tau * inst.trace.x1().norm() + C * D);
  }
}

TEST_CASE("longer windows help with accurate predictions") {
  std::vector<double> j1, j8;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Instance inst = testing::swap_instance(seed, 100);
    const Matrix Pmax = solve_dare(inst.bounds.Q_max, inst.bounds.R_max, inst.sys);
    const RolloutOptions lean{false};
    j1.push_back(mpc_rollout(inst.sys, inst.costs, Pmax, inst.trace,
                             PredictionStream::accurate(inst.trace, 1), 1, lean)
                     .trajectory()
                     .total_cost);
    j8.push_back(mpc_rollout(inst.sys, inst.costs, Pmax, inst.trace,
                             PredictionStream::accurate(inst.trace, 8), 8, lean)
                     .trajectory()
                     .total_cost);
  }
  CHECK(median(j8) <= median(j1));
}

TEST_CASE("stream shorter than the window is rejected") {
  const Instance inst = testing::swap_instance(1, 20);
  try {
    mpc_rollout(inst.sys, inst.costs, inst.bounds, inst.trace,
                PredictionStream::accurate(inst.trace, 2), 3);
    FAIL("expected a stream error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kStream);
  }
}

TEST_CASE("rollout CSV") {
  const Instance inst = testing::swap_instance(1, 6);
  const MpcRollout r = mpc_rollout(inst.sys, inst.costs, inst.bounds, inst.trace,
                                   PredictionStream::accurate(inst.trace, 2), 2);
  std::stringstream ss;
  write_rollout_csv(ss, r);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "t,branch,x1,x2,u1,stage_cost");
  std::getline(ss, line);
  CHECK(line.rfind("1,windowed,", 0) == 0);
  std::getline(ss, line);
  std::getline(ss, line);
  CHECK(line.rfind("3,windowed,", 0) == 0);
  std::getline(ss, line);
  CHECK(line.rfind("4,exact-tail,", 0) == 0);
  std::getline(ss, line);
  std::getline(ss, line);
  CHECK(line.rfind("6,terminal,", 0) == 0);
}
