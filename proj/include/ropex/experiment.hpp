#pragma once

// Replicated experiments: key=value configuration, parallel replications,
// per-replication and aggregate CSV files, sweep summaries.

#include "ropex/metrics.hpp"
#include "ropex/problems.hpp"
#include "ropex/schedules.hpp"
#include "ropex/solver.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ropex {

struct ExperimentConfig {
  ProblemOptions problem;
  PolicyKind policy = PolicyKind::MonotoneFixed;
  /// One horizon per sweep entry, strictly increasing.
  std::vector<std::int64_t> k_values{1024};
  std::uint64_t replications = 1;
  std::uint64_t seed = 0;
  std::optional<std::int64_t> metric_cadence;
  std::optional<std::uint64_t> batch_size;
  std::optional<double> eta_override;
  std::optional<Point> start;
  double grid_step = 1e-3;
  /// Extragradient settings for problems that need a numeric reference.
  double reference_tolerance = 1e-12;
  double reference_eta = 1e-4;
  std::int64_t reference_max_iterations = 20'000'000;
  /// Replace declared constants, e.g. {"L_F", 3.0}.
  std::map<std::string, double> constant_overrides;
  std::string output_dir;
  /// 0 means every available thread.
  int workers = 0;
  bool record_wall_time = false;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Parses key=value lines ('#' comments, blank lines ignored). Unknown keys
/// are errors. Keys: problem, strongly_monotone, mu_reg, cap_box,
/// network_file, toy_dim, toy_sigma_F, toy_sigma_H, policy, K, k_sweep,
/// replications, seed, metric_cadence, batch_size, eta, start, grid_step,
/// reference_tolerance, reference_eta, reference_max_iterations, workers,
/// record_wall_time, output_dir, const.<name>.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);
/// Canonical echo; parse_config(write_config(c)) reproduces c.
void write_config(std::ostream& os, const ExperimentConfig& config);

/// Applies constant overrides. Throws ConfigError for unknown names.
void apply_constant_overrides(ProblemConstants& c, const std::map<std::string, double>& overrides);

/// The configured problem with overrides applied and numeric references
/// computed where no closed form exists.
ProblemInstance prepare_problem(const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

/// One replication's run.csv content.
struct RunTable {
  std::vector<std::int64_t> k;
  std::vector<std::optional<double>> wall_seconds;
  std::vector<Point> xbar;
  std::vector<MetricValues> metrics;
};

RunTable to_table(const RunRecord& record);

struct AggregateRow {
  std::int64_t k = 0;
  std::array<std::optional<double>, kMetricNames.size()> mean{};
  std::array<std::optional<double>, kMetricNames.size()> stderr_{};
  std::optional<double> mean_wall_seconds;
};

/// Across-replication mean and standard error per checkpoint. A metric is NA
/// at a checkpoint unless every replication reports it. Throws ConfigError
/// for mismatched checkpoint grids or an empty input.
std::vector<AggregateRow> aggregate(const std::vector<RunTable>& runs);

using MetricSlopes = std::array<std::optional<RateFit>, kMetricNames.size()>;

/// Log-log slopes of each metric's means; present only with >= 3 positive points.
MetricSlopes fit_slopes(const std::vector<std::pair<double, std::array<std::optional<double>, kMetricNames.size()>>>& series);

struct HorizonSummary {
  std::int64_t K = 0;
  std::vector<AggregateRow> rows;
  ValidationReport validation;
  std::optional<BoundReport> bounds;
  MetricSlopes checkpoint_slopes;
  double wall_seconds = 0.0;
};

struct SummaryReport {
  std::string problem_id;
  PolicyKind policy = PolicyKind::MonotoneFixed;
  std::vector<HorizonSummary> horizons;
  /// Slopes of the final-checkpoint means across the K sweep.
  MetricSlopes sweep_slopes;
  std::vector<std::string> warnings;
};

// ---------------------------------------------------------------------------
// CSV I/O
// ---------------------------------------------------------------------------

void write_run_csv(std::ostream& os, const RunTable& table);
/// Throws ConfigError on a malformed file.
RunTable read_run_csv(std::istream& is);
void write_aggregate_csv(std::ostream& os, const std::vector<AggregateRow>& rows);
void write_sweep_csv(std::ostream& os, const SummaryReport& report);
void write_summary(std::ostream& os, const SummaryReport& report, bool with_wall_time);

// ---------------------------------------------------------------------------
// Drivers
// ---------------------------------------------------------------------------

struct ExperimentResult {
  SummaryReport summary;
  /// Per horizon, per replication.
  std::vector<std::vector<RunRecord>> records;
};

/// Runs every horizon of the sweep. Schedules are validated first
/// (ScheduleViolation on failure). Replications run on `workers` threads
/// unless `serial`. Writes files when config.output_dir is non-empty:
///   config.txt, K<K>/rep<r>/run.csv, K<K>/aggregate.csv, sweep.csv,
///   summary.txt, and timing.csv when record_wall_time is set.
ExperimentResult run_experiment(const ExperimentConfig& config, bool serial = false);

/// Re-aggregates the rep*/run.csv files below a K<K> directory.
std::vector<AggregateRow> summarize_directory(const std::string& k_dir);

}  // namespace ropex
