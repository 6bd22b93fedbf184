#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "olqr/model.hpp"
#include "olqr/tolerances.hpp"

namespace olqr {

// One sweep: every (seed, W, snr) combination on instances from `profile`.
// Loaded from JSON, e.g.
//   {"profile": "swap", "T": 200, "seeds": {"first": 1, "count": 20},
//    "W": [1, 2, 3], "snr": [0, 0.1], "noise": "iid", "jobs": 4}
// "seeds" may also be an explicit list. Unknown keys are rejected.
struct ExperimentConfig {
  std::string profile = "swap";
  int T = 200;
  std::vector<std::uint64_t> seeds;
  std::vector<int> windows;
  std::vector<double> snrs{0.0};
  NoiseSpec::Kind noise = NoiseSpec::Kind::kIid;
  double growth = 0.0;  // depth-growing noise only
  std::string out;
  int jobs = 1;
  // Off by default so reruns are byte-identical; when on, wall_ms holds the
  // measured cell time.
  bool record_timing = false;
  Tolerances tol;

  // Throws Error(kConfig) on empty seed/W lists, W < 0, snr < 0, T < 2,
  // jobs < 1 or an unknown profile.
  void validate() const;

  static ExperimentConfig defaults();
  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig load(const std::string& path);
};

struct SweepRow {
  std::uint64_t seed = 0;
  int W = 0;
  double snr = 0.0;
  double J_pi = 0.0;
  double J_star = 0.0;
  double regret = 0.0;
  double partI_coeff = 0.0;
  double energy_d = 0.0;
  double partII_coeff = 0.0;
  double energy_e = 0.0;
  double wall_ms = 0.0;
  std::string error;  // empty on success; metrics are NaN otherwise
  // Quadratic-form regret value, kept for checks but not part of the CSV.
  double regret_formula = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // sorted by (seed, W, snr)
  int failures() const;
};

// Seed used for the prediction noise of an instance. Fixed across W and
// snr, so cells differ only in the quantity being swept.
std::uint64_t prediction_seed(std::uint64_t instance_seed);

NoiseSpec noise_for(const ExperimentConfig& config, double snr);

// A single cell; failures are caught and recorded in `error`.
SweepRow run_cell(const ExperimentConfig& config, std::uint64_t seed, int W,
                  double snr);

// All cells of one seed share the instance, the offline policy and P_max.
std::vector<SweepRow> run_seed(const ExperimentConfig& config,
                               std::uint64_t seed);

// Seeds are distributed over `config.jobs` threads; the output does not
// depend on scheduling.
SweepResult run_sweep(const ExperimentConfig& config);

inline constexpr const char* kSweepHeader =
    "seed,W,snr,J_pi,J_star,regret,partI_coeff,energy_d,partII_coeff,energy_e,"
    "wall_ms";

std::string format_row(const SweepRow& row);
// Inverse of format_row; the error column is not represented.
SweepRow parse_row(const std::string& line);

void emit_csv(std::ostream& out, const SweepResult& result);
// Throws Error(kIo) naming the path.
void emit_csv(const std::string& path, const SweepResult& result);

// Median of the finite entries; NaN when there are none.
double median(std::vector<double> values);

}  // namespace olqr
