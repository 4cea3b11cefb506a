#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "meco/dp.hpp"
#include "meco/threshold.hpp"

namespace meco {

// What a sweep varies: total bits D, slot count K, the CPU stay-idle
// probability, or the buffer size Q.
enum class SweepAxis { None, TotalBits, NumSlots, CpuIdleStay, BufferSize };

SweepAxis parse_axis(std::string_view name);  // "D" | "K" | "P11" | "Q"
std::string_view axis_string(SweepAxis axis);

struct ExperimentConfig {
  SystemParams params;
  std::vector<PolicyKind> policies;  // defaults to the zero-buffer optimum
  double bacs_threshold = 40.0;      // bits, applied to every bacs entry
  SweepAxis axis = SweepAxis::None;
  std::vector<double> values;
  int episodes = 10000;
  std::uint64_t base_seed = 1;
  std::string out_path;  // empty means stdout
  DpGrid grid;
  SimOptions sim;
  double threshold_rel_tol = 0.005;
  int threshold_max_iter = 30;
};

ExperimentConfig default_config();

// Strict parse of the JSON config text: unknown keys are rejected, range
// violations name the offending field. Omitted parameters keep the reference
// defaults.
ExperimentConfig parse_config(const std::string& json_text);

// parse_config over a file's content; parse errors carry the path.
ExperimentConfig load_config(const std::string& path);

// One CSV row of results. dp_value/rel_gap are filled by the dp comparison;
// `error` carries a per-cell failure message while the rest of the row keeps
// the cell's identity columns.
struct ResultRow {
  std::string policy;
  double total_bits = 0.0;
  int num_slots = 0;
  double buffer_size = 0.0;
  double p11 = 0.0, p00 = 0.0, pgg = 0.0, pbb = 0.0;
  int episodes = 0;
  std::uint64_t base_seed = 0;
  double mean_energy = 0.0;
  double stddev_energy = 0.0;
  std::optional<double> dp_value;
  std::optional<double> rel_gap;
  std::string error;
};

// Evaluates every configured policy at the config's parameters (no sweep).
std::vector<ResultRow> run_simulate(const ExperimentConfig& config);

// Full sweep: for each axis value (ascending) and each policy (by name), one
// row. Per-cell failures are recorded in the error column; the sweep
// continues.
std::vector<ResultRow> run_sweep(const ExperimentConfig& config);

// Desk-scale comparison against the exact solver: solves the grid once, then
// scores every policy by exact path enumeration on the same grid and reports
// the relative gap to the optimum.
std::vector<ResultRow> run_dp_compare(const ExperimentConfig& config);

// Deterministic CSV emission: fixed column order, %.17g doubles, so identical
// configs and seeds produce byte-identical files.
void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);

// Sidecar metadata: the full resolved config (plus the parameter fingerprint)
// as indented JSON.
void write_metadata(std::ostream& out, const ExperimentConfig& config);

// Structured-text rendering of a threshold-search result.
std::string format_threshold(const ThresholdResult& result);

}  // namespace meco
