#include "ropex/metrics.hpp"

#include "ropex/errors.hpp"

#include <cmath>
#include <string>

namespace ropex {

std::string_view to_string(GapMethod m) {
  switch (m) {
    case GapMethod::Analytic: return "analytic";
    case GapMethod::BruteForce: return "brute_force";
    case GapMethod::Reference: return "reference";
    case GapMethod::Unavailable: return "unavailable";
  }
  return "unavailable";
}

namespace {

double grid_max(const GridObjective& f, const Box& box, double step, bool parallel) {
  return parallel ? grid_max_parallel(f, box, step) : grid_max_serial(f, box, step);
}

bool brute_force_feasible(const ProblemInstance& p) {
  return p.set.bounded() && p.dim() <= 3;
}

bool brute_force_optimal(const ProblemInstance& p) {
  if (!p.refs.inner_solution_set) return false;
  const Box& S = *p.refs.inner_solution_set;
  return ((S.upper - S.lower).array() > 0.0).count() <= 2;
}

}  // namespace

double feasibility_gap_bruteforce(const ProblemInstance& problem, const Point& xt, double grid_step,
                                  bool parallel) {
  if (!problem.set.bounded()) throw ConfigError("brute-force gap needs a bounded feasible set");
  if (problem.dim() > 3) throw ConfigError("brute-force gap is limited to dimension <= 3");
  if (xt.size() != problem.dim()) throw ConfigError("dimension mismatch in feasibility gap");
  const StochasticOracle& F = problem.inner;
  const GridObjective obj = [&F, &xt](const Point& x) { return F.mean(x).dot(xt - x); };
  return grid_max(obj, problem.set.bounds(), grid_step, parallel);
}

double optimality_gap_bruteforce(const ProblemInstance& problem, const Point& xt, double grid_step,
                                 bool parallel) {
  if (!problem.refs.inner_solution_set) throw ConfigError("optimality gap needs a description of X_F*");
  if (!brute_force_optimal(problem)) throw ConfigError("X_F* has more than two free coordinates");
  if (xt.size() != problem.dim()) throw ConfigError("dimension mismatch in optimality gap");
  const StochasticOracle& H = problem.outer;
  const GridObjective obj = [&H, &xt](const Point& x) { return H.mean(x).dot(xt - x); };
  return grid_max(obj, *problem.refs.inner_solution_set, grid_step, parallel);
}

double nash_saddle_gap(const Point& xt) { return 40.0 * (xt[1] - 5.0); }

double nash_outer_gap(const Point& xt) { return 0.5 * xt.squaredNorm() - 212.5; }

double lcp_phi(const Point& x, const Point& Fx) {
  return x.cwiseMin(0.0).norm() + Fx.cwiseMin(0.0).norm() + std::abs(x.dot(Fx));
}

double lcp_residual_phi(const ProblemInstance& problem, const Point& xt) {
  return lcp_phi(xt, problem.inner.mean(xt));
}

std::optional<double> dist_inner(const ProblemInstance& problem, const Point& xt) {
  if (problem.refs.inner_solution_set) {
    const Box& S = *problem.refs.inner_solution_set;
    return (xt - xt.cwiseMax(S.lower).cwiseMin(S.upper)).norm();
  }
  if (problem.refs.inner_reference) return (xt - *problem.refs.inner_reference).norm();
  return std::nullopt;
}

GapReport gap_report(const ProblemInstance& problem, const Point& xt, const MetricOptions& o) {
  GapReport r;
  if (problem.refs.feasibility_gap) {
    r.feasibility_gap = problem.refs.feasibility_gap(xt);
    r.feasibility_method = GapMethod::Analytic;
  } else if (o.brute_force && brute_force_feasible(problem)) {
    r.feasibility_gap = feasibility_gap_bruteforce(problem, xt, o.grid_step, o.parallel);
    r.feasibility_method = GapMethod::BruteForce;
    r.grid_step = o.grid_step;
  }
  if (problem.refs.optimality_gap) {
    r.optimality_gap = problem.refs.optimality_gap(xt);
    r.optimality_method = GapMethod::Analytic;
  } else if (o.brute_force && brute_force_optimal(problem)) {
    r.optimality_gap = optimality_gap_bruteforce(problem, xt, o.grid_step, o.parallel);
    r.optimality_method = GapMethod::BruteForce;
    r.grid_step = o.grid_step;
  }
  r.dist_inner = dist_inner(problem, xt);
  if (r.dist_inner) {
    r.dist_method = problem.refs.inner_solution_set ? GapMethod::Analytic : GapMethod::Reference;
  }
  if (problem.refs.complementarity) r.lcp_phi = lcp_residual_phi(problem, xt);
  return r;
}

std::size_t metric_index(std::string_view name) {
  for (std::size_t i = 0; i < kMetricNames.size(); ++i) {
    if (kMetricNames[i] == name) return i;
  }
  throw ConfigError("unknown metric '" + std::string(name) + "'");
}

const std::optional<double>& MetricValues::get(std::string_view name) const {
  return values[metric_index(name)];
}

MetricValues evaluate_metrics(const ProblemInstance& problem, const Point& xt,
                              const std::optional<Point>& previous, const MetricOptions& options) {
  const GapReport g = gap_report(problem, xt, options);
  MetricValues m;
  m[0] = g.dist_inner;
  m[1] = g.feasibility_gap;
  m[2] = g.optimality_gap;
  if (problem.refs.saddle_gap) m[3] = problem.refs.saddle_gap(xt);
  if (problem.refs.outer_objective && problem.refs.outer_solution) {
    m[4] = problem.refs.outer_objective(xt) - problem.refs.outer_objective(*problem.refs.outer_solution);
  }
  m[5] = g.lcp_phi;
  if (previous) m[6] = (xt - *previous).norm();
  return m;
}

double iterate_drift(const std::vector<Point>& averages, std::size_t i) {
  if (averages.size() < 2) throw ConfigError("iterate drift needs at least two checkpoints");
  if (i == 0 || i >= averages.size()) throw ConfigError("iterate drift index out of range");
  return (averages[i] - averages[i - 1]).norm();
}

namespace {

double natural_residual(const ProblemInstance& p, const MeanMap& op, const Point& x) {
  return (x - project(p.set, x - op(x))).norm();
}

/// Extragradient with step 1/(2L) until ‖x_{t+1} − x_t‖ <= tol.
Point extragradient(const ProblemInstance& p, const MeanMap& op, double L, Point x,
                    const ReferenceOptions& o, std::int64_t& used, const char* stage) {
  const double step = 0.5 / std::max(L, 1e-12);
  for (; used < o.max_iterations; ++used) {
    const Point y = project(p.set, x - step * op(x));
    const Point next = project(p.set, x - step * op(y));
    const double moved = (next - x).norm();
    x = next;
    if (!x.allFinite()) throw OracleError("reference solver produced a non-finite iterate");
    if (moved <= o.tolerance) return x;
  }
  throw ConvergenceError(std::string("reference solver: ") + stage + " stage did not reach tolerance within " +
                         std::to_string(o.max_iterations) + " iterations");
}

}  // namespace

ReferenceResult reference_solution(const ProblemInstance& problem, const ReferenceOptions& o) {
  if (!(o.tolerance > 0.0)) throw ConfigError("reference tolerance must be positive");
  if (!(o.eta_small >= 0.0)) throw ConfigError("eta_small must be nonnegative");
  Point x = project(problem.set, o.start ? *o.start : problem.start);
  const StochasticOracle& F = problem.inner;
  const MeanMap inner = [&F](const Point& z) { return F.mean(z); };
  std::int64_t used = 0;
  x = extragradient(problem, inner, problem.constants.L_F, x, o, used, "inner");

  MeanMap final_op = inner;
  if (o.eta_small > 0.0) {
    const StochasticOracle& H = problem.outer;
    const double eta = o.eta_small;
    final_op = [&F, &H, eta](const Point& z) -> Point { return F.mean(z) + eta * H.mean(z); };
    x = extragradient(problem, final_op, problem.constants.L_F + eta * problem.constants.L_H, x, o,
                      used, "bilevel");
  }

  ReferenceResult r;
  r.x = x;
  r.iterations = used;
  r.residual = problem.refs.complementarity ? lcp_phi(x, F.mean(x)) : natural_residual(problem, final_op, x);
  return r;
}

RateFit loglog_rate_fit(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw ConfigError("rate fit needs at least three points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [K, v] : points) {
    if (!(K > 0.0) || !(v > 0.0)) throw ConfigError("rate fit needs positive K and values");
    const double lx = std::log(K), ly = std::log(v);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(points.size());
  const double denom = n * sxx - sx * sx;
  if (!(denom > 1e-12 * n * sxx)) throw ConfigError("rate fit needs at least two distinct K values");
  RateFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

}  // namespace ropex
