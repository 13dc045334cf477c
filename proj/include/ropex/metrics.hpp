#pragma once

// Gap functions, distances, the LCP residual, reference solutions and
// log-log rate fits. All metrics read deterministic mean maps.

#include "ropex/problems.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ropex {

// ---------------------------------------------------------------------------
// Grid maximization kernels
// ---------------------------------------------------------------------------

using GridObjective = std::function<double(const Point&)>;

/// Points per axis so that consecutive points are at most `step` apart and
/// both endpoints are included; degenerate axes get a single point.
std::vector<Eigen::Index> grid_counts(const Box& box, double step);

/// Max of f over the grid. Reference implementation: nested loops, one thread.
double grid_max_serial(const GridObjective& f, const Box& box, double step);
/// Same maximum, flat index space split across OpenMP threads.
double grid_max_parallel(const GridObjective& f, const Box& box, double step);

/// Largest grid the brute-force gaps accept.
inline constexpr std::int64_t kMaxGridPoints = 500'000'000;

// ---------------------------------------------------------------------------
// Gaps
// ---------------------------------------------------------------------------

enum class GapMethod { Analytic, BruteForce, Reference, Unavailable };
std::string_view to_string(GapMethod m);

struct GapReport {
  std::optional<double> feasibility_gap;
  std::optional<double> optimality_gap;
  std::optional<double> dist_inner;
  std::optional<double> lcp_phi;
  GapMethod feasibility_method = GapMethod::Unavailable;
  GapMethod optimality_method = GapMethod::Unavailable;
  GapMethod dist_method = GapMethod::Unavailable;
  /// Set when a brute-force value is present.
  std::optional<double> grid_step;
};

/// max over a grid on X of <F(x), x̃ − x>. Requires a bounded box of
/// dimension <= 3; throws ConfigError otherwise.
double feasibility_gap_bruteforce(const ProblemInstance& problem, const Point& xt, double grid_step,
                                  bool parallel = true);

/// max over a grid on X_F* of <H(x), x̃ − x>. X_F* must be a box with at most
/// two free coordinates; throws ConfigError otherwise.
double optimality_gap_bruteforce(const ProblemInstance& problem, const Point& xt, double grid_step,
                                 bool parallel = true);

/// f(x̃₁, 5) − f(20, x̃₂) simplified to 40(x̃₂ − 5).
double nash_saddle_gap(const Point& xt);
/// ½‖x̃‖² − ½‖(20, 5)‖².
double nash_outer_gap(const Point& xt);

/// ‖min(x,0)‖ + ‖min(Fx,0)‖ + |xᵀFx|.
double lcp_phi(const Point& x, const Point& Fx);
double lcp_residual_phi(const ProblemInstance& problem, const Point& xt);

/// dist(x̃, X_F*) from the analytic box, or ‖x̃ − inner_reference‖.
std::optional<double> dist_inner(const ProblemInstance& problem, const Point& xt);

struct MetricOptions {
  double grid_step = 1e-3;
  /// Use brute force when no closed form exists (small boxes only).
  bool brute_force = true;
  bool parallel = true;
};

GapReport gap_report(const ProblemInstance& problem, const Point& xt, const MetricOptions& options = {});

// ---------------------------------------------------------------------------
// Per-checkpoint metric row
// ---------------------------------------------------------------------------

inline constexpr std::array<std::string_view, 7> kMetricNames = {
    "dist_inner", "feasibility_gap", "optimality_gap", "saddle_gap",
    "outer_gap",  "lcp_phi",         "iterate_drift"};

struct MetricValues {
  std::array<std::optional<double>, kMetricNames.size()> values{};

  std::optional<double>& operator[](std::size_t i) { return values[i]; }
  const std::optional<double>& operator[](std::size_t i) const { return values[i]; }
  /// Throws ConfigError for an unknown name.
  const std::optional<double>& get(std::string_view name) const;
};

std::size_t metric_index(std::string_view name);

/// Every metric the problem supports at x̃; iterate_drift needs the previous
/// checkpoint's average.
MetricValues evaluate_metrics(const ProblemInstance& problem, const Point& xt,
                              const std::optional<Point>& previous, const MetricOptions& options = {});

/// ‖x̄_i − x̄_{i−1}‖ over a checkpoint sequence. Throws ConfigError for i == 0
/// or fewer than two checkpoints.
double iterate_drift(const std::vector<Point>& averages, std::size_t i);

// ---------------------------------------------------------------------------
// Reference solutions
// ---------------------------------------------------------------------------

struct ReferenceResult {
  Point x;
  /// φ for complementarity problems, ‖x − proj(x − F(x))‖ otherwise.
  double residual = 0.0;
  std::int64_t iterations = 0;
};

struct ReferenceOptions {
  std::int64_t max_iterations = 20'000'000;
  double tolerance = 1e-12;
  /// Regularization weight of the bilevel stage; 0 skips it.
  double eta_small = 0.0;
  std::optional<Point> start;
};

/// Deterministic extragradient on F until successive iterates move by at most
/// `tolerance`, then (eta_small > 0) warm-started on F + eta_small·H.
/// Throws ConvergenceError when the budget runs out.
ReferenceResult reference_solution(const ProblemInstance& problem, const ReferenceOptions& options = {});

// ---------------------------------------------------------------------------
// Rate fits
// ---------------------------------------------------------------------------

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Least squares of log(value) on log(K). Needs >= 3 points, positive K and values.
RateFit loglog_rate_fit(const std::vector<std::pair<double, double>>& points);

}  // namespace ropex
