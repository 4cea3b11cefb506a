// mecoctl — experiment driver for the offloading simulator.
//
// Subcommands:
//   simulate    evaluate the configured policies at one parameter point
//   sweep       vary one axis (D|K|P11|Q) over a value list
//   dp-solve    run the exact finite-horizon solver, optionally export the table
//   dp-compare  score every policy against the exact optimum (desk scale)
//   threshold   bisection search for the buffer size worth switching at
//
// Results go to stdout or --out as CSV (JSON for dp-solve/threshold); --out
// additionally writes a <out>.meta.json sidecar with the resolved config.
//
// Exit codes: 0 ok, 2 parse error, 3 validation error, 4 budget exceeded,
// 1 anything unexpected.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "meco/dp.hpp"
#include "meco/errors.hpp"
#include "meco/experiment.hpp"
#include "meco/threshold.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUnexpected = 1;
constexpr int kExitParse = 2;
constexpr int kExitValidation = 3;
constexpr int kExitBudget = 4;

struct CliArgs {
  std::string config_path;
  std::vector<std::string> policies;
  std::optional<int> episodes;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  // sweep
  std::optional<std::string> axis;
  std::vector<double> values;
  // dp-solve / dp-compare
  std::optional<double> bit_step;
  std::optional<std::uint64_t> budget;
  std::string dp_out;
  // threshold
  std::optional<double> rel_tol;
  std::optional<int> max_iter;
};

void add_common_options(CLI::App* cmd, CliArgs& args, bool with_policies) {
  cmd->add_option("--config", args.config_path, "JSON experiment config file")
      ->check(CLI::ExistingFile);
  if (with_policies) {
    cmd->add_option("--policy", args.policies,
                    "policy to run (repeatable, overrides the config list): "
                    "zero-opt|large-sub|tlbp|zbp|bacs|equal|dp");
  }
  cmd->add_option("--episodes", args.episodes, "Monte Carlo episodes per cell");
  cmd->add_option("--seed", args.seed, "base seed; episode i uses seed base+i");
  cmd->add_option("--out", args.out_path,
                  "output file (default stdout); also writes <out>.meta.json");
}

// Config file (or defaults) with command-line overrides layered on top.
meco::ExperimentConfig resolve_config(const CliArgs& args) {
  meco::ExperimentConfig config =
      args.config_path.empty() ? meco::default_config() : meco::load_config(args.config_path);
  if (!args.policies.empty()) {
    config.policies.clear();
    for (const std::string& name : args.policies) {
      meco::PolicyKind kind;
      kind.name = meco::parse_policy_name(name);
      kind.bacs_threshold = config.bacs_threshold;
      config.policies.push_back(kind);
    }
  }
  if (args.episodes) {
    if (*args.episodes <= 0) throw std::invalid_argument("--episodes must be positive");
    config.episodes = *args.episodes;
  }
  if (args.seed) config.base_seed = *args.seed;
  if (!args.out_path.empty()) config.out_path = args.out_path;
  if (args.axis) config.axis = meco::parse_axis(*args.axis);
  if (!args.values.empty()) config.values = args.values;
  if (args.bit_step) config.grid.bit_step = *args.bit_step;
  if (args.budget) config.grid.max_state_actions = *args.budget;
  if (args.rel_tol) {
    if (!(*args.rel_tol > 0.0)) throw std::invalid_argument("--rel-tol must be > 0");
    config.threshold_rel_tol = *args.rel_tol;
  }
  if (args.max_iter) {
    if (*args.max_iter < 1) throw std::invalid_argument("--max-iter must be >= 1");
    config.threshold_max_iter = *args.max_iter;
  }
  return config;
}

std::ofstream open_or_throw(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open output file: " + path);
  return out;
}

void write_sidecar(const meco::ExperimentConfig& config) {
  std::ofstream meta = open_or_throw(config.out_path + ".meta.json");
  meco::write_metadata(meta, config);
}

void emit_rows(const meco::ExperimentConfig& config, const std::vector<meco::ResultRow>& rows) {
  if (config.out_path.empty()) {
    meco::write_csv(std::cout, rows);
    return;
  }
  std::ofstream out = open_or_throw(config.out_path);
  meco::write_csv(out, rows);
  write_sidecar(config);
}

void emit_text(const meco::ExperimentConfig& config, const std::string& text) {
  if (config.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out = open_or_throw(config.out_path);
  out << text;
  write_sidecar(config);
}

int cmd_simulate(const CliArgs& args) {
  const meco::ExperimentConfig config = resolve_config(args);
  emit_rows(config, meco::run_simulate(config));
  return kExitOk;
}

int cmd_sweep(const CliArgs& args) {
  const meco::ExperimentConfig config = resolve_config(args);
  if (config.axis == meco::SweepAxis::None) {
    throw std::invalid_argument("sweep needs --axis (D|K|P11|Q), from the flag or the config");
  }
  if (config.values.empty()) {
    throw std::invalid_argument("sweep needs --values (or a 'values' list in the config)");
  }
  emit_rows(config, meco::run_sweep(config));
  return kExitOk;
}

int cmd_dp_solve(const CliArgs& args) {
  const meco::ExperimentConfig config = resolve_config(args);
  config.params.validate();
  const std::uint64_t count = meco::count_state_actions(config.params, config.grid);
  const meco::DpSolution solution = meco::solve_dp(config.params, config.grid);

  const auto pic = meco::stationary_dist(config.params.cpu_chain);
  const auto pih = meco::stationary_dist(config.params.channel_chain);
  const char* start_names[2][2] = {{"busy_bad", "busy_good"}, {"idle_bad", "idle_good"}};
  nlohmann::json by_start;
  double expected = 0.0;
  for (int c = 0; c < 2; ++c) {
    for (int h = 0; h < 2; ++h) {
      const double v = solution.value(1, static_cast<meco::CpuState>(c),
                                      static_cast<meco::ChannelState>(h),
                                      config.params.total_bits, 0.0);
      by_start[start_names[c][h]] = v;
      expected += pic[static_cast<std::size_t>(c)] * pih[static_cast<std::size_t>(h)] * v;
    }
  }

  nlohmann::json summary = {
      {"bit_step", solution.bit_step()},
      {"num_slots", solution.num_slots()},
      {"remaining_levels", solution.remaining_levels()},
      {"buffer_levels", solution.buffer_levels()},
      {"state_action_count", count},
      {"expected_value_J", expected},
      {"value_by_start", by_start},
  };
  if (!args.dp_out.empty()) {
    std::ofstream table = open_or_throw(args.dp_out);
    meco::dp_export(solution, table);
    summary["table_file"] = args.dp_out;
  }
  emit_text(config, summary.dump(2) + "\n");
  return kExitOk;
}

int cmd_dp_compare(const CliArgs& args) {
  const meco::ExperimentConfig config = resolve_config(args);
  emit_rows(config, meco::run_dp_compare(config));
  return kExitOk;
}

int cmd_threshold(const CliArgs& args) {
  const meco::ExperimentConfig config = resolve_config(args);
  const meco::ThresholdResult result =
      meco::find_q_threshold(config.params, config.episodes, config.threshold_rel_tol,
                             config.threshold_max_iter, config.base_seed, config.sim);
  emit_text(config, meco::format_threshold(result));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"offloading-policy experiment driver"};
  app.require_subcommand(1);
  CliArgs args;

  CLI::App* simulate = app.add_subcommand("simulate", "evaluate policies at one parameter point");
  add_common_options(simulate, args, true);

  CLI::App* sweep = app.add_subcommand("sweep", "evaluate policies along one parameter axis");
  add_common_options(sweep, args, true);
  sweep->add_option("--axis", args.axis, "sweep axis: D|K|P11|Q");
  sweep->add_option("--values", args.values, "axis values, comma separated")->delimiter(',');

  CLI::App* dp_solve = app.add_subcommand("dp-solve", "run the exact solver, print a summary");
  add_common_options(dp_solve, args, false);
  dp_solve->add_option("--bit-step", args.bit_step, "state/action grid resolution in bits");
  dp_solve->add_option("--budget", args.budget, "max state-action evaluations allowed");
  dp_solve->add_option("--dp-out", args.dp_out, "export the solved table to this file");

  CLI::App* dp_compare = app.add_subcommand("dp-compare", "score policies against the optimum");
  add_common_options(dp_compare, args, true);
  dp_compare->add_option("--bit-step", args.bit_step, "state/action grid resolution in bits");
  dp_compare->add_option("--budget", args.budget, "max state-action evaluations allowed");

  CLI::App* threshold = app.add_subcommand("threshold", "bisect for the useful buffer size");
  add_common_options(threshold, args, false);
  threshold->add_option("--rel-tol", args.rel_tol, "stop when the gap falls below this fraction");
  threshold->add_option("--max-iter", args.max_iter, "bisection pass limit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitParse;
  }

  try {
    if (app.got_subcommand(simulate)) return cmd_simulate(args);
    if (app.got_subcommand(sweep)) return cmd_sweep(args);
    if (app.got_subcommand(dp_solve)) return cmd_dp_solve(args);
    if (app.got_subcommand(dp_compare)) return cmd_dp_compare(args);
    if (app.got_subcommand(threshold)) return cmd_threshold(args);
  } catch (const nlohmann::json::parse_error& e) {
    std::cerr << "mecoctl: config parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const meco::BudgetExceededError& e) {
    std::cerr << "mecoctl: " << e.what() << "\n";
    return kExitBudget;
  } catch (const meco::InfeasibleActionError& e) {
    std::cerr << "mecoctl: " << e.what() << "\n";
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "mecoctl: config error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "mecoctl: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::domain_error& e) {
    std::cerr << "mecoctl: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "mecoctl: unexpected error: " << e.what() << "\n";
    return kExitUnexpected;
  }
  return kExitUnexpected;  // unreachable: require_subcommand guarantees a match
}
