// Command-line driver: sweeps, single-row replay, instance checks.
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "olqr/error.hpp"
#include "olqr/harness.hpp"
#include "olqr/instance_io.hpp"
#include "olqr/mpc.hpp"
#include "olqr/regret.hpp"
#include "olqr/riccati.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kCellFailures = 2;

struct InstanceArgs {
  std::string path;
  std::uint64_t seed = 1;
  int T = 200;
  std::string profile = "swap";

  void add_to(CLI::App* app) {
    app->add_option("--instance", path, "instance file (overrides --seed/--T/--profile)");
    app->add_option("--seed", seed, "generator seed");
    app->add_option("--T", T, "horizon");
    app->add_option("--profile", profile, "swap or random");
  }

  olqr::Instance load() const {
    if (!path.empty()) return olqr::load_instance(path);
    return olqr::generate_instance(seed, T, olqr::GeneratorProfile::by_name(profile));
  }
};

int run(const std::string& config_path, const std::string& out_override,
        int jobs, std::uint64_t seed_offset, bool timing) {
  olqr::ExperimentConfig config = config_path.empty()
                                      ? olqr::ExperimentConfig::defaults()
                                      : olqr::ExperimentConfig::load(config_path);
  if (!out_override.empty()) config.out = out_override;
  if (jobs > 0) config.jobs = jobs;
  if (timing) config.record_timing = true;
  for (auto& s : config.seeds) s += seed_offset;
  config.validate();

  const olqr::SweepResult result = olqr::run_sweep(config);
  if (config.out.empty() || config.out == "-") {
    olqr::emit_csv(std::cout, result);
  } else {
    olqr::emit_csv(config.out, result);
  }
  if (result.failures() == 0) return kOk;

  std::optional<std::ofstream> log;
  if (!config.out.empty() && config.out != "-") log.emplace(config.out + ".errors");
  for (const auto& row : result.rows) {
    if (row.error.empty()) continue;
    const std::string line = "seed=" + std::to_string(row.seed) + " W=" +
                             std::to_string(row.W) + " snr=" +
                             olqr::format_double(row.snr) + ": " + row.error;
    std::cerr << line << '\n';
    if (log) *log << line << '\n';
  }
  return kCellFailures;
}

int replay(const std::string& row_text, const std::string& config_path) {
  const olqr::SweepRow wanted = olqr::parse_row(row_text);
  const olqr::ExperimentConfig config = config_path.empty()
                                            ? olqr::ExperimentConfig::defaults()
                                            : olqr::ExperimentConfig::load(config_path);
  const olqr::SweepRow got = olqr::run_cell(config, wanted.seed, wanted.W, wanted.snr);
  if (!got.error.empty()) {
    std::cerr << got.error << '\n';
    return kCellFailures;
  }
  std::cout << "seed " << got.seed << "\nW " << got.W << "\nsnr "
            << olqr::format_double(got.snr) << "\nJ_pi "
            << olqr::format_double(got.J_pi) << "\nJ_star "
            << olqr::format_double(got.J_star) << "\nregret "
            << olqr::format_double(got.regret) << "\nregret_formula "
            << olqr::format_double(got.regret_formula) << '\n';
  const bool same = olqr::format_double(got.regret) == olqr::format_double(wanted.regret) &&
                    olqr::format_double(got.J_pi) == olqr::format_double(wanted.J_pi);
  std::cout << "match " << (same ? "yes" : "no") << '\n';
  return same ? kOk : kCellFailures;
}

int validate(const InstanceArgs& args) {
  const olqr::Instance inst = args.load();
  const auto report = olqr::validate_instance(inst.sys, inst.costs, inst.bounds);
  for (const auto& c : report.checks) {
    std::cout << c.name << ' ' << (c.passed ? "pass" : "FAIL");
    if (!c.detail.empty()) std::cout << " (" << c.detail << ')';
    std::cout << '\n';
  }
  return report.ok() ? kOk : kCellFailures;
}

int constants(const InstanceArgs& args) {
  const olqr::Instance inst = args.load();
  const auto c = olqr::stability_constants(inst.sys, inst.bounds);
  olqr::write_constants(std::cout, c, olqr::explicit_constants(c, inst.sys, inst.bounds));
  return kOk;
}

int generate(const InstanceArgs& args, const std::string& out) {
  const olqr::Instance inst = args.load();
  if (out.empty() || out == "-") {
    olqr::write_instance(std::cout, inst);
  } else {
    olqr::save_instance(out, inst);
  }
  return kOk;
}

int rollout(const InstanceArgs& args, int W, double snr, const std::string& out,
            const std::string& decomposition_out) {
  const olqr::Instance inst = args.load();
  const olqr::ExperimentConfig config = olqr::ExperimentConfig::defaults();
  const auto preds = olqr::make_predictions(inst.trace, W, olqr::noise_for(config, snr),
                                            olqr::prediction_seed(inst.seed));
  const auto c = olqr::stability_constants(inst.sys, inst.bounds);
  const auto mpc = olqr::mpc_rollout(inst.sys, inst.costs, c.P_max, inst.trace, preds, W);
  const auto policy = olqr::build_offline_policy(inst.sys, inst.costs);
  olqr::RegretOptions options;
  options.constants = c;
  options.bounds = inst.bounds;
  const auto report = olqr::dynamic_regret(mpc, policy, inst.trace, preds, options);
  if (out.empty() || out == "-") {
    olqr::write_rollout_csv(std::cout, mpc);
  } else {
    std::ofstream f(out);
    if (!f) throw olqr::Error(olqr::ErrorCode::kIo, "cannot write " + out);
    olqr::write_rollout_csv(f, mpc);
  }
  if (!decomposition_out.empty()) {
    std::ofstream f(decomposition_out);
    if (!f) throw olqr::Error(olqr::ErrorCode::kIo, "cannot write " + decomposition_out);
    olqr::write_decomposition_csv(f, *report.decomposition);
  }
  olqr::write_report(std::cerr, report);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online LQR with predictions: MPC regret experiments"};
  app.require_subcommand(1);

  std::string config_path, out;
  int jobs = 0;
  std::uint64_t seed_offset = 0;
  bool timing = false;
  auto* run_cmd = app.add_subcommand("run", "run a sweep and write CSV");
  run_cmd->add_option("--config", config_path, "JSON config (defaults if omitted)");
  run_cmd->add_option("--out", out, "CSV path, '-' for stdout");
  run_cmd->add_option("--jobs", jobs, "worker threads");
  run_cmd->add_option("--seed-offset", seed_offset, "added to every seed");
  run_cmd->add_flag("--timing", timing, "record wall_ms (breaks byte-identical reruns)");

  std::string row;
  auto* replay_cmd = app.add_subcommand("replay", "recompute one CSV row");
  replay_cmd->add_option("--row", row, "a data line of a sweep CSV")->required();
  replay_cmd->add_option("--config", config_path, "config the row came from");

  InstanceArgs inst_args;
  auto* validate_cmd = app.add_subcommand("validate", "check the standing assumptions");
  inst_args.add_to(validate_cmd);
  auto* constants_cmd = app.add_subcommand("constants", "print tau, rho, gamma, P_max");
  inst_args.add_to(constants_cmd);
  auto* generate_cmd = app.add_subcommand("generate", "write an instance file");
  inst_args.add_to(generate_cmd);
  generate_cmd->add_option("--out", out, "instance path, '-' for stdout");

  int W = 5;
  double snr = 0.0;
  std::string decomposition_out;
  auto* rollout_cmd = app.add_subcommand("rollout", "one MPC rollout as CSV, report on stderr");
  inst_args.add_to(rollout_cmd);
  rollout_cmd->add_option("--W", W, "prediction window");
  rollout_cmd->add_option("--snr", snr, "prediction noise amplitude");
  rollout_cmd->add_option("--out", out, "rollout CSV path, '-' for stdout");
  rollout_cmd->add_option("--decomposition", decomposition_out,
                          "per-step action-error decomposition CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run_cmd) return run(config_path, out, jobs, seed_offset, timing);
    if (*replay_cmd) return replay(row, config_path);
    if (*validate_cmd) return validate(inst_args);
    if (*constants_cmd) return constants(inst_args);
    if (*generate_cmd) return generate(inst_args, out);
    if (*rollout_cmd) return rollout(inst_args, W, snr, out, decomposition_out);
  } catch (const olqr::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == olqr::ErrorCode::kConfig || e.code() == olqr::ErrorCode::kParse ||
                   e.code() == olqr::ErrorCode::kIo
               ? kConfigError
               : kCellFailures;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kCellFailures;
  }
  return kOk;
}
