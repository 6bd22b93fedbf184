#include "olqr/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "olqr/error.hpp"
#include "olqr/instance_io.hpp"
#include "olqr/mpc.hpp"
#include "olqr/offline.hpp"
#include "olqr/regret.hpp"
#include "olqr/riccati.hpp"
#include "olqr/rng.hpp"

namespace olqr {

namespace {

constexpr std::uint64_t kPredictionSalt = 0x70726564696374ULL;  // "predict"

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::kConfig, what);
}

NoiseSpec::Kind parse_noise(const std::string& name) {
  if (name == "iid") return NoiseSpec::Kind::kIid;
  if (name == "depth") return NoiseSpec::Kind::kDepthGrowing;
  config_error("unknown noise kind '" + name + "' (expected iid or depth)");
}

void apply_tolerances(const nlohmann::json& j, Tolerances& tol) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key == "atol") tol.atol = it->get<double>();
    else if (key == "rtol") tol.rtol = it->get<double>();
    else if (key == "symmetry") tol.symmetry = it->get<double>();
    else if (key == "bounds_eig") tol.bounds_eig = it->get<double>();
    else if (key == "sandwich_eig") tol.sandwich_eig = it->get<double>();
    else if (key == "singular_condition") tol.singular_condition = it->get<double>();
    else if (key == "rank_relative") tol.rank_relative = it->get<double>();
    else if (key == "dare_tol") tol.dare_tol = it->get<double>();
    else if (key == "dare_max_iter") tol.dare_max_iter = it->get<int>();
    else config_error("unknown tolerance '" + key + "'");
  }
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

SweepRow failed_row(std::uint64_t seed, int W, double snr, const std::string& what) {
  SweepRow row;
  row.seed = seed;
  row.W = W;
  row.snr = snr;
  row.J_pi = row.J_star = row.regret = row.regret_formula = nan();
  row.partI_coeff = row.energy_d = row.partII_coeff = row.energy_e = nan();
  row.error = what.empty() ? "unknown failure" : what;
  return row;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (seeds.empty()) config_error("seed list is empty");
  if (windows.empty()) config_error("W list is empty");
  for (int w : windows) {
    if (w < 0) config_error("W values must be >= 0, got " + std::to_string(w));
  }
  if (snrs.empty()) config_error("snr list is empty");
  for (double s : snrs) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      config_error("snr values must be finite and >= 0");
    }
  }
  if (T < 2) config_error("T must be >= 2");
  if (jobs < 1) config_error("jobs must be >= 1");
  if (!(growth >= 0.0)) config_error("growth must be >= 0");
  try {
    GeneratorProfile::by_name(profile);
  } catch (const Error& e) {
    config_error(e.what());
  }
}

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig c;
  for (std::uint64_t s = 1; s <= 20; ++s) c.seeds.push_back(s);
  for (int w = 1; w <= 12; ++w) c.windows.push_back(w);
  return c;
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  ExperimentConfig c = defaults();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) config_error("config must be a JSON object");
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& key = it.key();
      const auto& v = *it;
      if (key == "profile") {
        c.profile = v.get<std::string>();
      } else if (key == "T") {
        c.T = v.get<int>();
      } else if (key == "seeds") {
        c.seeds.clear();
        if (v.is_array()) {
          for (const auto& s : v) c.seeds.push_back(s.get<std::uint64_t>());
        } else if (v.is_object()) {
          const auto first = v.value("first", std::uint64_t{1});
          const auto count = v.value("count", std::uint64_t{0});
          for (std::uint64_t k = 0; k < count; ++k) c.seeds.push_back(first + k);
        } else {
          config_error("seeds must be a list or {first, count}");
        }
      } else if (key == "W") {
        c.windows = v.get<std::vector<int>>();
      } else if (key == "snr") {
        c.snrs = v.get<std::vector<double>>();
      } else if (key == "noise") {
        c.noise = parse_noise(v.get<std::string>());
      } else if (key == "growth") {
        c.growth = v.get<double>();
      } else if (key == "out") {
        c.out = v.get<std::string>();
      } else if (key == "jobs") {
        c.jobs = v.get<int>();
      } else if (key == "record_timing") {
        c.record_timing = v.get<bool>();
      } else if (key == "tolerances") {
        apply_tolerances(v, c.tol);
      } else {
        config_error("unknown key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("bad value: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

int SweepResult::failures() const {
  return static_cast<int>(std::count_if(rows.begin(), rows.end(),
                                        [](const SweepRow& r) { return !r.error.empty(); }));
}

std::uint64_t prediction_seed(std::uint64_t instance_seed) {
  return derive_seed(instance_seed, kPredictionSalt);
}

NoiseSpec noise_for(const ExperimentConfig& config, double snr) {
  if (snr == 0.0) return NoiseSpec::accurate();
  if (config.noise == NoiseSpec::Kind::kDepthGrowing) {
    return NoiseSpec::depth_growing(snr, config.growth);
  }
  return NoiseSpec::iid(snr);
}

namespace {

struct SeedContext {
  Instance inst;
  OfflinePolicy policy;
  StabilityConstants constants;
  double J_star;
};

SeedContext prepare(const ExperimentConfig& config, std::uint64_t seed) {
  Instance inst =
      generate_instance(seed, config.T, GeneratorProfile::by_name(config.profile));
  OfflinePolicy policy = build_offline_policy(inst.sys, inst.costs, config.tol);
  StabilityConstants constants = stability_constants(inst.sys, inst.bounds, config.tol);
  const double J_star = optimal_rollout(policy, inst.trace).total_cost;
  return {std::move(inst), std::move(policy), std::move(constants), J_star};
}

SweepRow evaluate(const ExperimentConfig& config, const SeedContext& ctx, int W,
                  double snr) {
  const auto start = std::chrono::steady_clock::now();
  const Instance& inst = ctx.inst;
  const PredictionStream preds = make_predictions(
      inst.trace, W, noise_for(config, snr), prediction_seed(inst.seed));
  RolloutOptions options;
  options.retain_gains = false;
  const MpcRollout rollout = mpc_rollout(inst.sys, inst.costs, ctx.constants.P_max,
                                         inst.trace, preds, W, options, config.tol);
  const RegretBound f =
      regret_bound(ctx.constants, W, inst.trace, preds, inst.sys, inst.bounds);

  SweepRow row;
  row.seed = inst.seed;
  row.W = W;
  row.snr = snr;
  row.J_pi = rollout.trajectory().total_cost;
  row.J_star = ctx.J_star;
  row.regret = row.J_pi - row.J_star;
  row.regret_formula = regret_formula(rollout.trajectory(), ctx.policy, inst.trace);
  row.partI_coeff = f.partI_coeff;
  row.energy_d = f.energy_d;
  row.partII_coeff = f.partII_coeff;
  row.energy_e = f.energy_e;
  if (config.record_timing) {
    row.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - start)
                      .count();
  }
  return row;
}

}  // namespace

std::vector<SweepRow> run_seed(const ExperimentConfig& config, std::uint64_t seed) {
  std::vector<SweepRow> rows;
  std::optional<SeedContext> ctx;
  std::string setup_error;
  try {
    ctx.emplace(prepare(config, seed));
  } catch (const std::exception& e) {
    setup_error = e.what();
  }
  for (int W : config.windows) {
    for (double snr : config.snrs) {
      if (!ctx) {
        rows.push_back(failed_row(seed, W, snr, setup_error));
        continue;
      }
      try {
        rows.push_back(evaluate(config, *ctx, W, snr));
      } catch (const std::exception& e) {
        rows.push_back(failed_row(seed, W, snr, e.what()));
      }
    }
  }
  return rows;
}

SweepRow run_cell(const ExperimentConfig& config, std::uint64_t seed, int W,
                  double snr) {
  ExperimentConfig one = config;
  one.windows = {W};
  one.snrs = {snr};
  return run_seed(one, seed).front();
}

SweepResult run_sweep(const ExperimentConfig& config) {
  config.validate();
  const std::size_t n = config.seeds.size();
  std::vector<std::vector<SweepRow>> per_seed(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      per_seed[k] = run_seed(config, config.seeds[k]);
    }
  };
  const int threads = std::min<int>(config.jobs, static_cast<int>(n));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  SweepResult result;
  for (auto& rows : per_seed) {
    for (auto& r : rows) result.rows.push_back(std::move(r));
  }
  std::stable_sort(result.rows.begin(), result.rows.end(),
                   [](const SweepRow& a, const SweepRow& b) {
                     if (a.seed != b.seed) return a.seed < b.seed;
                     if (a.W != b.W) return a.W < b.W;
                     return a.snr < b.snr;
                   });
  return result;
}

std::string format_row(const SweepRow& r) {
  std::string s = std::to_string(r.seed) + ',' + std::to_string(r.W) + ',' +
                  format_double(r.snr);
  for (double v : {r.J_pi, r.J_star, r.regret, r.partI_coeff, r.energy_d,
                   r.partII_coeff, r.energy_e, r.wall_ms}) {
    s += ',';
    s += format_double(v);
  }
  return s;
}

SweepRow parse_row(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (fields.size() != 11) {
    throw Error(ErrorCode::kParse, "expected 11 comma-separated fields, got " +
                                       std::to_string(fields.size()));
  }
  auto num = [&](std::size_t k) {
    try {
      std::size_t used = 0;
      const double v = std::stod(fields[k], &used);
      if (used != fields[k].size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParse, "field " + std::to_string(k + 1) +
                                         " is not a number: '" + fields[k] + "'");
    }
  };
  SweepRow r;
  try {
    r.seed = std::stoull(fields[0]);
    r.W = std::stoi(fields[1]);
  } catch (const std::exception&) {
    throw Error(ErrorCode::kParse, "seed and W must be integers");
  }
  r.snr = num(2);
  r.J_pi = num(3);
  r.J_star = num(4);
  r.regret = num(5);
  r.partI_coeff = num(6);
  r.energy_d = num(7);
  r.partII_coeff = num(8);
  r.energy_e = num(9);
  r.wall_ms = num(10);
  return r;
}

void emit_csv(std::ostream& out, const SweepResult& result) {
  out << kSweepHeader << '\n';
  for (const auto& r : result.rows) out << format_row(r) << '\n';
}

void emit_csv(const std::string& path, const SweepResult& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  emit_csv(out, result);
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

double median(std::vector<double> values) {
  values.erase(std::remove_if(values.begin(), values.end(),
                              [](double v) { return !std::isfinite(v); }),
               values.end());
  if (values.empty()) return nan();
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<long>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<long>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace olqr
