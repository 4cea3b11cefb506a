#include "meco/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

namespace meco {

namespace {

using nlohmann::json;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double as_number(const json& j, const std::string& key) {
  if (!j.is_number()) {
    throw std::invalid_argument("config key '" + key + "' must be a number");
  }
  return j.get<double>();
}

double as_probability(const json& j, const std::string& key) {
  const double p = as_number(j, key);
  if (p < 0.0 || p > 1.0) {
    throw std::invalid_argument(key + "=" + fmt17(p) + " outside [0,1]");
  }
  return p;
}

void apply_param(SystemParams& p, const std::string& key, const json& value) {
  if (key == "total_bits" || key == "D") {
    p.total_bits = as_number(value, key);
  } else if (key == "num_slots" || key == "K") {
    const double v = as_number(value, key);
    if (v < 1 || v != std::floor(v)) {
      throw std::invalid_argument(key + "=" + fmt17(v) + " must be a positive integer");
    }
    p.num_slots = static_cast<int>(v);
  } else if (key == "slot_duration" || key == "t0") {
    p.slot_duration = as_number(value, key);
  } else if (key == "cycle_energy_coeff" || key == "gamma") {
    p.cycle_energy_coeff = as_number(value, key);
  } else if (key == "cycles_per_bit" || key == "w") {
    p.cycles_per_bit = as_number(value, key);
  } else if (key == "tx_energy_coeff" || key == "lambda0") {
    p.tx_energy_coeff = as_number(value, key);
  } else if (key == "gain_good" || key == "g") {
    p.gain_good = as_number(value, key);
  } else if (key == "gain_bad" || key == "b") {
    p.gain_bad = as_number(value, key);
  } else if (key == "cpu_stay_busy" || key == "P00") {
    p.cpu_chain.stay_prob_state0 = as_probability(value, key);
  } else if (key == "cpu_stay_idle" || key == "P11") {
    p.cpu_chain.stay_prob_state1 = as_probability(value, key);
  } else if (key == "channel_stay_bad" || key == "Pbb") {
    p.channel_chain.stay_prob_state0 = as_probability(value, key);
  } else if (key == "channel_stay_good" || key == "Pgg") {
    p.channel_chain.stay_prob_state1 = as_probability(value, key);
  } else if (key == "buffer_size" || key == "Q") {
    p.buffer_size = as_number(value, key);
  } else {
    throw std::invalid_argument("unknown params key '" + key + "'");
  }
}

CpuState parse_cpu_state(const std::string& s) {
  if (s == "busy") return CpuState::Busy;
  if (s == "idle") return CpuState::Idle;
  throw std::invalid_argument("initial_cpu must be 'busy' or 'idle', got '" + s + "'");
}

ChannelState parse_channel_state(const std::string& s) {
  if (s == "bad") return ChannelState::Bad;
  if (s == "good") return ChannelState::Good;
  throw std::invalid_argument("initial_channel must be 'bad' or 'good', got '" + s + "'");
}

void validate_axis_values(SweepAxis axis, const std::vector<double>& values) {
  if (values.empty()) {
    throw std::invalid_argument("sweep values must be non-empty");
  }
  for (double v : values) {
    switch (axis) {
      case SweepAxis::TotalBits:
      case SweepAxis::NumSlots:
        if (v < 1 || v != std::floor(v)) {
          throw std::invalid_argument("sweep value " + fmt17(v) + " must be a positive integer for axis " +
                                      std::string(axis_string(axis)));
        }
        break;
      case SweepAxis::BufferSize:
        if (v < 0 || v != std::floor(v)) {
          throw std::invalid_argument("sweep value " + fmt17(v) +
                                      " must be a nonnegative integer for axis Q");
        }
        break;
      case SweepAxis::CpuIdleStay:
        if (v < 0.0 || v > 1.0) {
          throw std::invalid_argument("sweep value " + fmt17(v) + " outside [0,1] for axis P11");
        }
        break;
      case SweepAxis::None:
        break;
    }
  }
}

}  // namespace

SweepAxis parse_axis(std::string_view name) {
  if (name == "D") return SweepAxis::TotalBits;
  if (name == "K") return SweepAxis::NumSlots;
  if (name == "P11") return SweepAxis::CpuIdleStay;
  if (name == "Q") return SweepAxis::BufferSize;
  throw std::invalid_argument("unknown sweep axis '" + std::string(name) +
                              "' (expected D|K|P11|Q)");
}

std::string_view axis_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::None: return "none";
    case SweepAxis::TotalBits: return "D";
    case SweepAxis::NumSlots: return "K";
    case SweepAxis::CpuIdleStay: return "P11";
    case SweepAxis::BufferSize: return "Q";
  }
  throw std::invalid_argument("unhandled axis");
}

ExperimentConfig default_config() {
  ExperimentConfig config;
  PolicyKind kind;
  kind.name = PolicyName::ZeroBufferOptimal;
  config.policies.push_back(kind);
  return config;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json root = json::parse(json_text);  // json::parse_error propagates with context
  if (!root.is_object()) {
    throw std::invalid_argument("config root must be a JSON object");
  }

  ExperimentConfig config = default_config();

  for (const auto& [key, value] : root.items()) {
    if (key == "params") {
      if (!value.is_object()) {
        throw std::invalid_argument("'params' must be an object");
      }
      for (const auto& [pk, pv] : value.items()) {
        apply_param(config.params, pk, pv);
      }
    } else if (key == "policies") {
      if (!value.is_array() || value.empty()) {
        throw std::invalid_argument("'policies' must be a non-empty array of names");
      }
      config.policies.clear();
      for (const auto& name : value) {
        if (!name.is_string()) {
          throw std::invalid_argument("'policies' entries must be strings");
        }
        PolicyKind kind;
        kind.name = parse_policy_name(name.get<std::string>());
        config.policies.push_back(kind);
      }
    } else if (key == "bacs_threshold") {
      config.bacs_threshold = as_number(value, key);
      if (config.bacs_threshold < 0.0) {
        throw std::invalid_argument("bacs_threshold must be >= 0");
      }
    } else if (key == "sweep") {
      if (!value.is_object()) {
        throw std::invalid_argument("'sweep' must be an object with axis and values");
      }
      for (const auto& [sk, sv] : value.items()) {
        if (sk == "axis") {
          config.axis = parse_axis(sv.get<std::string>());
        } else if (sk == "values") {
          if (!sv.is_array()) {
            throw std::invalid_argument("'sweep.values' must be an array");
          }
          config.values.clear();
          for (const auto& v : sv) {
            config.values.push_back(as_number(v, "sweep.values"));
          }
        } else {
          throw std::invalid_argument("unknown sweep key '" + sk + "'");
        }
      }
    } else if (key == "episodes") {
      const double v = as_number(value, key);
      if (v < 1 || v != std::floor(v)) {
        throw std::invalid_argument("episodes must be a positive integer");
      }
      config.episodes = static_cast<int>(v);
    } else if (key == "seed") {
      if (!value.is_number_unsigned() && !value.is_number_integer()) {
        throw std::invalid_argument("seed must be a nonnegative integer");
      }
      if (value.is_number_integer() && value.get<long long>() < 0) {
        throw std::invalid_argument("seed must be a nonnegative integer");
      }
      config.base_seed = value.get<std::uint64_t>();
    } else if (key == "out") {
      config.out_path = value.get<std::string>();
    } else if (key == "dp") {
      if (!value.is_object()) {
        throw std::invalid_argument("'dp' must be an object");
      }
      for (const auto& [dk, dv] : value.items()) {
        if (dk == "bit_step") {
          config.grid.bit_step = as_number(dv, "dp.bit_step");
        } else if (dk == "max_state_actions") {
          config.grid.max_state_actions = dv.get<std::uint64_t>();
        } else {
          throw std::invalid_argument("unknown dp key '" + dk + "'");
        }
      }
    } else if (key == "sim") {
      if (!value.is_object()) {
        throw std::invalid_argument("'sim' must be an object");
      }
      for (const auto& [sk, sv] : value.items()) {
        if (sk == "round_to_bits") {
          config.sim.round_to_bits = sv.get<bool>();
        } else if (sk == "bit_step") {
          config.sim.bit_step = as_number(sv, "sim.bit_step");
        } else if (sk == "initial_cpu") {
          config.sim.initial_cpu = parse_cpu_state(sv.get<std::string>());
        } else if (sk == "initial_channel") {
          config.sim.initial_channel = parse_channel_state(sv.get<std::string>());
        } else {
          throw std::invalid_argument("unknown sim key '" + sk + "'");
        }
      }
    } else if (key == "threshold") {
      if (!value.is_object()) {
        throw std::invalid_argument("'threshold' must be an object");
      }
      for (const auto& [tk, tv] : value.items()) {
        if (tk == "rel_tol") {
          config.threshold_rel_tol = as_number(tv, "threshold.rel_tol");
          if (!(config.threshold_rel_tol > 0.0)) {
            throw std::invalid_argument("threshold.rel_tol must be > 0");
          }
        } else if (tk == "max_iter") {
          const double v = as_number(tv, "threshold.max_iter");
          if (v < 1 || v != std::floor(v)) {
            throw std::invalid_argument("threshold.max_iter must be a positive integer");
          }
          config.threshold_max_iter = static_cast<int>(v);
        } else {
          throw std::invalid_argument("unknown threshold key '" + tk + "'");
        }
      }
    } else {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }

  for (auto& kind : config.policies) {
    kind.bacs_threshold = config.bacs_threshold;
  }
  if (config.axis != SweepAxis::None) {
    validate_axis_values(config.axis, config.values);
  }
  config.params.validate();
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open config file: " + path);
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

namespace {

SystemParams apply_axis(const SystemParams& base, SweepAxis axis, double value) {
  SystemParams p = base;
  switch (axis) {
    case SweepAxis::TotalBits:
      p.total_bits = value;
      break;
    case SweepAxis::NumSlots:
      p.num_slots = static_cast<int>(value);
      break;
    case SweepAxis::CpuIdleStay:
      p.cpu_chain.stay_prob_state1 = value;
      break;
    case SweepAxis::BufferSize:
      p.buffer_size = value;
      break;
    case SweepAxis::None:
      break;
  }
  return p;
}

ResultRow row_skeleton(const SystemParams& p, const ExperimentConfig& config,
                       std::string policy) {
  ResultRow row;
  row.policy = std::move(policy);
  row.total_bits = p.total_bits;
  row.num_slots = p.num_slots;
  row.buffer_size = p.buffer_size;
  row.p11 = p.cpu_chain.stay_prob_state1;
  row.p00 = p.cpu_chain.stay_prob_state0;
  row.pgg = p.channel_chain.stay_prob_state1;
  row.pbb = p.channel_chain.stay_prob_state0;
  row.episodes = config.episodes;
  row.base_seed = config.base_seed;
  return row;
}

// Policy instantiation for one sweep cell; dp kinds get a freshly solved table
// for the cell's parameters.
std::unique_ptr<Policy> cell_policy(const SystemParams& p, const ExperimentConfig& config,
                                    const PolicyKind& kind) {
  PolicyKind resolved = kind;
  if (kind.name == PolicyName::DpTable && !kind.dp_solution) {
    resolved.dp_solution = std::make_shared<DpSolution>(solve_dp(p, config.grid));
  }
  return make_policy(p, resolved);
}

std::vector<PolicyKind> sorted_policies(const ExperimentConfig& config) {
  std::vector<PolicyKind> kinds = config.policies;
  std::stable_sort(kinds.begin(), kinds.end(), [](const PolicyKind& a, const PolicyKind& b) {
    return policy_name_string(a.name) < policy_name_string(b.name);
  });
  return kinds;
}

ResultRow evaluate_cell(const SystemParams& p, const ExperimentConfig& config,
                        const PolicyKind& kind) {
  ResultRow row = row_skeleton(p, config, std::string(policy_name_string(kind.name)));
  try {
    const auto policy = cell_policy(p, config, kind);
    const EvalReport report =
        evaluate(p, *policy, config.episodes, config.base_seed, config.sim);
    row.mean_energy = report.mean_energy;
    row.stddev_energy = report.stddev_energy;
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

// Runs the cells across a small thread pool; each cell writes its own
// preassigned slot, so the output order never depends on scheduling.
std::vector<ResultRow> run_cells(const ExperimentConfig& config,
                                 const std::vector<SystemParams>& params,
                                 const std::vector<PolicyKind>& kinds) {
  std::vector<ResultRow> rows(params.size());
  unsigned pool = std::thread::hardware_concurrency();
  if (pool == 0) pool = 1;
  pool = std::min<unsigned>(pool, static_cast<unsigned>(params.size()));
  if (pool <= 1) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      rows[i] = evaluate_cell(params[i], config, kinds[i]);
    }
    return rows;
  }

  std::vector<std::thread> workers;
  workers.reserve(pool);
  for (unsigned w = 0; w < pool; ++w) {
    workers.emplace_back([&, w] {
      for (std::size_t i = w; i < params.size(); i += pool) {
        rows[i] = evaluate_cell(params[i], config, kinds[i]);
      }
    });
  }
  for (auto& worker : workers) worker.join();
  return rows;
}

}  // namespace

std::vector<ResultRow> run_simulate(const ExperimentConfig& config) {
  config.params.validate();
  std::vector<SystemParams> cells;
  std::vector<PolicyKind> cell_kinds;
  for (const PolicyKind& kind : sorted_policies(config)) {
    cells.push_back(config.params);
    cell_kinds.push_back(kind);
  }
  return run_cells(config, cells, cell_kinds);
}

std::vector<ResultRow> run_sweep(const ExperimentConfig& config) {
  if (config.axis == SweepAxis::None) {
    throw std::invalid_argument("sweep needs an axis (D|K|P11|Q) and values");
  }
  validate_axis_values(config.axis, config.values);
  std::vector<double> values = config.values;
  std::sort(values.begin(), values.end());
  const auto kinds = sorted_policies(config);

  std::vector<SystemParams> cells;
  std::vector<PolicyKind> cell_kinds;
  for (double v : values) {
    const SystemParams p = apply_axis(config.params, config.axis, v);
    for (const PolicyKind& kind : kinds) {
      cells.push_back(p);
      cell_kinds.push_back(kind);
    }
  }
  return run_cells(config, cells, cell_kinds);
}

std::vector<ResultRow> run_dp_compare(const ExperimentConfig& config) {
  config.params.validate();
  const SystemParams& p = config.params;

  // One solve serves every policy row, including the dp policy itself.
  auto solution = std::make_shared<DpSolution>(solve_dp(p, config.grid));
  const auto pic = stationary_dist(p.cpu_chain);
  const auto pih = stationary_dist(p.channel_chain);
  double dp_value = 0.0;
  for (int c = 0; c < 2; ++c) {
    for (int h = 0; h < 2; ++h) {
      dp_value += pic[static_cast<std::size_t>(c)] * pih[static_cast<std::size_t>(h)] *
                  solution->value(1, static_cast<CpuState>(c), static_cast<ChannelState>(h),
                                  p.total_bits, 0.0);
    }
  }

  // Score policies by exact path enumeration on the solver's grid so the gap
  // is free of Monte Carlo noise.
  SimOptions exact_options = config.sim;
  exact_options.round_to_bits = true;
  exact_options.bit_step = config.grid.bit_step;

  std::vector<ResultRow> rows;
  for (const PolicyKind& kind : sorted_policies(config)) {
    ResultRow row = row_skeleton(p, config, std::string(policy_name_string(kind.name)));
    row.episodes = 0;  // exact enumeration, no sampling
    row.dp_value = dp_value;
    try {
      PolicyKind resolved = kind;
      if (kind.name == PolicyName::DpTable && !kind.dp_solution) {
        resolved.dp_solution = solution;
      }
      const auto policy = make_policy(p, resolved);
      const double value = exact_expected_energy(p, *policy, exact_options);
      row.mean_energy = value;
      row.stddev_energy = 0.0;
      row.rel_gap = dp_value > 0.0 ? (value - dp_value) / dp_value : 0.0;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "policy,D,K,Q,P11,P00,Pgg,Pbb,n,base_seed,mean_energy_J,stddev_J,dp_value_J,rel_gap,error\n";
  for (const ResultRow& row : rows) {
    out << row.policy << ',' << fmt17(row.total_bits) << ',' << row.num_slots << ','
        << fmt17(row.buffer_size) << ',' << fmt17(row.p11) << ',' << fmt17(row.p00) << ','
        << fmt17(row.pgg) << ',' << fmt17(row.pbb) << ',' << row.episodes << ','
        << row.base_seed << ',' << fmt17(row.mean_energy) << ',' << fmt17(row.stddev_energy)
        << ',';
    if (row.dp_value) {
      out << fmt17(*row.dp_value);
    }
    out << ',';
    if (row.rel_gap) {
      out << fmt17(*row.rel_gap);
    }
    out << ',';
    if (!row.error.empty()) {
      std::string quoted = row.error;
      std::string::size_type pos = 0;
      while ((pos = quoted.find('"', pos)) != std::string::npos) {
        quoted.insert(pos, 1, '"');
        pos += 2;
      }
      out << '"' << quoted << '"';
    }
    out << '\n';
  }
}

void write_metadata(std::ostream& out, const ExperimentConfig& config) {
  json meta;
  meta["format"] = "mecoctl-meta";
  meta["version"] = 1;
  const SystemParams& p = config.params;
  meta["params"] = {
      {"total_bits", p.total_bits},
      {"num_slots", p.num_slots},
      {"slot_duration", p.slot_duration},
      {"cycle_energy_coeff", p.cycle_energy_coeff},
      {"cycles_per_bit", p.cycles_per_bit},
      {"tx_energy_coeff", p.tx_energy_coeff},
      {"gain_good", p.gain_good},
      {"gain_bad", p.gain_bad},
      {"cpu_stay_busy", p.cpu_chain.stay_prob_state0},
      {"cpu_stay_idle", p.cpu_chain.stay_prob_state1},
      {"channel_stay_bad", p.channel_chain.stay_prob_state0},
      {"channel_stay_good", p.channel_chain.stay_prob_state1},
      {"buffer_size", p.buffer_size},
  };
  json policies = json::array();
  for (const PolicyKind& kind : config.policies) {
    policies.push_back(std::string(policy_name_string(kind.name)));
  }
  meta["policies"] = policies;
  meta["bacs_threshold"] = config.bacs_threshold;
  if (config.axis != SweepAxis::None) {
    meta["sweep"] = {{"axis", std::string(axis_string(config.axis))},
                     {"values", config.values}};
  } else {
    meta["sweep"] = nullptr;
  }
  meta["episodes"] = config.episodes;
  meta["seed"] = config.base_seed;
  meta["out"] = config.out_path;
  meta["dp"] = {{"bit_step", config.grid.bit_step},
                {"max_state_actions", config.grid.max_state_actions}};
  json sim;
  sim["round_to_bits"] = config.sim.round_to_bits;
  sim["bit_step"] = config.sim.bit_step;
  if (config.sim.initial_cpu) {
    sim["initial_cpu"] = *config.sim.initial_cpu == CpuState::Busy ? "busy" : "idle";
  }
  if (config.sim.initial_channel) {
    sim["initial_channel"] = *config.sim.initial_channel == ChannelState::Bad ? "bad" : "good";
  }
  meta["sim"] = sim;
  meta["threshold"] = {{"rel_tol", config.threshold_rel_tol},
                       {"max_iter", config.threshold_max_iter}};
  char hash_buf[32];
  std::snprintf(hash_buf, sizeof hash_buf, "0x%016llx",
                static_cast<unsigned long long>(hash_params(p)));
  meta["params_hash"] = hash_buf;
  out << meta.dump(2) << '\n';
}

std::string format_threshold(const ThresholdResult& result) {
  json j;
  j["q_threshold_bits"] = result.q_threshold;
  j["iterations"] = result.iterations;
  j["final_gap_J"] = result.final_gap;
  j["converged"] = result.converged;
  j["episodes_per_probe"] = result.episodes_per_probe;
  j["base_seed"] = result.base_seed;
  j["zbp_mean_J"] = result.zbp_energy;
  j["tlbp_mean_at_zero_J"] = result.tlbp_energy_at_zero;
  j["tlbp_mean_at_half_d_J"] = result.tlbp_energy_at_half_d;
  return j.dump(2);
}

}  // namespace meco
