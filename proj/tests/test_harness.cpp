#include <doctest.h>

#include <cmath>
#include <sstream>

#include "olqr/error.hpp"
#include "olqr/harness.hpp"

using namespace olqr;

namespace {

ExperimentConfig small() {
  return ExperimentConfig::from_json_text(
      R"({"T": 30, "seeds": [3, 1, 2], "W": [2, 0], "snr": [0.5, 0]})");
}

std::string csv_of(const SweepResult& r) {
  std::stringstream ss;
  emit_csv(ss, r);
  return ss.str();
}

ErrorCode code_of(const std::string& json) {
  try {
    ExperimentConfig::from_json_text(json);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("config was accepted: " << json);
  return ErrorCode::kIo;
}

}  // namespace

TEST_CASE("config validation") {
  CHECK(code_of(R"({"W": []})") == ErrorCode::kConfig);
  CHECK(code_of(R"({"seeds": []})") == ErrorCode::kConfig);
  CHECK(code_of(R"({"W": [-1]})") == ErrorCode::kConfig);
  CHECK(code_of(R"({"snr": [-0.1]})") == ErrorCode::kConfig);
  CHECK(code_of(R"({"T": 1})") == ErrorCode::kConfig);
  CHECK(code_of(R"({"profile": "bogus"})") == ErrorCode::kConfig);
  CHECK(code_of(R"({"wat": 1})") == ErrorCode::kConfig);
  CHECK(code_of(R"({"W": "x"})") == ErrorCode::kConfig);
  CHECK(code_of(R"({)") == ErrorCode::kConfig);
  CHECK(code_of(R"({"tolerances": {"nope": 1}})") == ErrorCode::kConfig);

  const ExperimentConfig d = ExperimentConfig::defaults();
  CHECK(d.T == 200);
  CHECK(d.seeds.size() == 20);
  CHECK(d.profile == "swap");

  const ExperimentConfig c = ExperimentConfig::from_json_text(
      R"({"seeds": {"first": 5, "count": 3}, "noise": "depth", "growth": 0.5,
          "tolerances": {"rtol": 1e-6}})");
  CHECK(c.seeds == std::vector<std::uint64_t>{5, 6, 7});
  CHECK(c.noise == NoiseSpec::Kind::kDepthGrowing);
  CHECK(c.tol.rtol == 1e-6);
  CHECK(noise_for(c, 0.2).growth == 0.5);
  CHECK(noise_for(c, 0.0).kind == NoiseSpec::Kind::kAccurate);
}

TEST_CASE("sweep rows are complete and sorted") {
  const SweepResult r = run_sweep(small());
  REQUIRE(r.rows.size() == 12);
  CHECK(r.failures() == 0);
  for (std::size_t k = 1; k < r.rows.size(); ++k) {
    const auto& a = r.rows[k - 1];
    const auto& b = r.rows[k];
    CHECK(std::tie(a.seed, a.W, a.snr) < std::tie(b.seed, b.W, b.snr));
  }
  for (const auto& row : r.rows) {
    CHECK(row.regret >= -1e-8 * (1.0 + row.J_star));
    CHECK(std::abs(row.regret - row.regret_formula) <= 1e-8 * (1.0 + row.J_star));
    CHECK(row.wall_ms == 0.0);
    if (row.snr == 0.0) CHECK(row.energy_e == 0.0);
  }
}

TEST_CASE("sweep output does not depend on the job count") {
  ExperimentConfig c = small();
  const std::string one = csv_of(run_sweep(c));
  c.jobs = 3;
  CHECK(csv_of(run_sweep(c)) == one);
  CHECK(csv_of(run_sweep(c)) == one);
}

TEST_CASE("single cell equals its sweep row") {
  const ExperimentConfig c = small();
  const SweepResult r = run_sweep(c);
  const SweepRow cell = run_cell(c, 2, 2, 0.5);
  bool found = false;
  for (const auto& row : r.rows) {
    if (row.seed == 2 && row.W == 2 && row.snr == 0.5) {
      CHECK(format_row(row) == format_row(cell));
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("CSV format") {
  ExperimentConfig c = ExperimentConfig::from_json_text(R"({"T": 20, "seeds": [1], "W": [3], "snr": [0]})");
  const std::string text = csv_of(run_sweep(c));
  std::stringstream ss(text);
  std::string header, row, extra;
  std::getline(ss, header);
  std::getline(ss, row);
  CHECK(header == "seed,W,snr,J_pi,J_star,regret,partI_coeff,energy_d,partII_coeff,energy_e,wall_ms");
  CHECK_FALSE(static_cast<bool>(std::getline(ss, extra)));
  const SweepRow parsed = parse_row(row);
  CHECK(format_row(parsed) == row);
  CHECK(parsed.seed == 1);
  CHECK(parsed.W == 3);
  CHECK_THROWS_AS(parse_row("1,2,3"), Error);
  CHECK_THROWS_AS(parse_row("1,2,x,4,5,6,7,8,9,10,11"), Error);
}

TEST_CASE("failing cells are recorded and the sweep continues") {
  ExperimentConfig c = ExperimentConfig::from_json_text(
      R"({"T": 20, "seeds": [1, 2], "W": [1, 2], "snr": [0], "tolerances": {"dare_max_iter": 1}})");
  const SweepResult r = run_sweep(c);
  CHECK(r.rows.size() == 4);
  CHECK(r.failures() == 4);
  for (const auto& row : r.rows) {
    CHECK(std::isnan(row.regret));
    CHECK(row.error.find("did not converge") != std::string::npos);
  }
  CHECK(format_row(r.rows.front()).find("nan") != std::string::npos);
}

TEST_CASE("median") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 3.0, 2.0}) == 2.5);
  CHECK(median({NAN, 1.0}) == 1.0);
  CHECK(std::isnan(median({})));
}

TEST_CASE("unwritable output path") {
  try {
    emit_csv("/nonexistent-dir/x.csv", SweepResult{});
    FAIL("expected an io error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
    CHECK(std::string(e.what()).find("/nonexistent-dir/x.csv") != std::string::npos);
  }
}
