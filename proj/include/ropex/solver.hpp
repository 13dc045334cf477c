#pragma once

// The R-OpEx iteration: one F-batch and one H-sample per step, an
// extrapolated regularized direction, a projected step and a τ-weighted
// running average.

#include "ropex/metrics.hpp"
#include "ropex/problems.hpp"
#include "ropex/schedules.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace ropex {

struct RunConfig {
  std::int64_t K = 0;
  PolicyKind policy = PolicyKind::MonotoneFixed;
  /// F mini-batch; nullopt means the policy default (K for the mini-batch
  /// policy, 1 otherwise).
  std::optional<std::uint64_t> batch_size_F;
  /// Evaluate metrics every m iterations (plus K); nullopt selects the
  /// geometric grid 2, 4, 8, ..., K.
  std::optional<std::int64_t> metric_cadence;
  std::uint64_t seed = 0;
  std::uint64_t replication = 0;
  std::optional<Point> start;
  ScheduleOptions schedule_options;
  MetricOptions metric_options;
  bool evaluate_metrics = true;
  bool record_wall_time = false;
};

struct SolverState {
  /// Index of the next step to take; 1 right after init.
  std::int64_t k = 1;
  Point x_curr;
  Point x_prev;
  /// Samples taken at x_prev (at init: the k = 1 samples at x_curr).
  Point F_prev;
  Point H_prev;
  double eta_prev = 0.0;
  Point weighted_sum;
  double weight_total = 0.0;
  SeededStream stream;
  std::uint64_t batch_size = 1;
  /// The k = 1 samples were drawn during init and not consumed yet.
  bool primed = false;
  std::uint64_t f_draws = 0;
  std::uint64_t h_draws = 0;
};

/// x₀ = x₁ = proj(start); F_prev/H_prev primed with the k = 1 scenario;
/// η₀ = η₁. Throws ConfigError for an empty schedule.
SolverState init_state(const ProblemInstance& problem, const Schedule& schedule, const RunConfig& config);

/// g_k = F_k + η_k H_k + θ_k [F_k + η_{k−1} H_k − (F_{k−1} + η_{k−1} H_{k−1})].
Point assemble_direction(const SolverState& state, const ScheduleRow& row, const Point& F_k, const Point& H_k);

/// One iteration in place. Throws OracleError on a non-finite direction.
void step(SolverState& state, const ScheduleRow& row, const ProblemInstance& problem);

/// Σ τ_j x_{j+1} / Σ τ_j. Throws ConfigError before the first step.
Point averaged_iterate(const SolverState& state);

struct Checkpoint {
  /// x̄_k, the average after k − 1 steps.
  std::int64_t k = 0;
  Point xbar;
  MetricValues metrics;
  std::optional<double> wall_seconds;
};

struct RunRecord {
  std::vector<Checkpoint> checkpoints;
  Point final_average;
  std::uint64_t f_draws = 0;
  std::uint64_t h_draws = 0;
};

/// Checkpoint labels in (1, K]: powers of two plus K, or multiples of the cadence plus K.
std::vector<std::int64_t> checkpoint_grid(std::int64_t K, std::optional<std::int64_t> cadence);

/// Builds the schedule for config.policy and runs K − 1 steps.
RunRecord run(const ProblemInstance& problem, const RunConfig& config);
/// Runs a caller-supplied schedule (rows for k = 1..K−1).
RunRecord run(const ProblemInstance& problem, const Schedule& schedule, const RunConfig& config);

/// Effective F batch for a policy and horizon.
std::uint64_t effective_batch(PolicyKind policy, std::int64_t K, std::optional<std::uint64_t> requested);

}  // namespace ropex
