#include "ropex/solver.hpp"

#include "ropex/errors.hpp"

#include <algorithm>
#include <chrono>
#include <string>

namespace ropex {

namespace {

Point draw_F(const ProblemInstance& p, const SolverState& s, const Point& x, std::int64_t k) {
  return sample_batch(p.inner, x, s.stream.for_operator(OperatorTag::Inner).at(static_cast<std::uint64_t>(k)),
                      s.batch_size);
}

Point draw_H(const ProblemInstance& p, const SolverState& s, const Point& x, std::int64_t k) {
  return sample(p.outer, x, s.stream.for_operator(OperatorTag::Outer).at(static_cast<std::uint64_t>(k)));
}

}  // namespace

std::uint64_t effective_batch(PolicyKind policy, std::int64_t K, std::optional<std::uint64_t> requested) {
  if (requested) {
    if (*requested == 0) throw ConfigError("batch size must be at least 1");
    return *requested;
  }
  return policy == PolicyKind::SmoothStochasticMiniBatch ? static_cast<std::uint64_t>(K) : 1;
}

SolverState init_state(const ProblemInstance& problem, const Schedule& schedule, const RunConfig& config) {
  if (schedule.rows.empty()) throw ConfigError("schedule has no rows");
  SolverState s;
  const Point start = config.start ? *config.start : problem.start;
  if (start.size() != problem.dim()) throw ConfigError("start point has the wrong dimension");
  if (!start.allFinite()) throw ConfigError("start point must be finite");
  s.x_curr = project(problem.set, start);
  s.x_prev = s.x_curr;
  s.stream.seed = config.seed;
  s.stream.replication = config.replication;
  s.batch_size = schedule.batch_size;
  s.F_prev = draw_F(problem, s, s.x_curr, 1);
  s.H_prev = draw_H(problem, s, s.x_curr, 1);
  s.f_draws = s.batch_size;
  s.h_draws = 1;
  s.primed = true;
  s.eta_prev = schedule.rows.front().eta;
  s.weighted_sum = Point::Zero(problem.dim());
  s.weight_total = 0.0;
  s.k = 1;
  return s;
}

Point assemble_direction(const SolverState& s, const ScheduleRow& row, const Point& F_k, const Point& H_k) {
  return F_k + row.eta * H_k + row.theta * (F_k + s.eta_prev * H_k - (s.F_prev + s.eta_prev * s.H_prev));
}

void step(SolverState& s, const ScheduleRow& row, const ProblemInstance& problem) {
  Point F_k, H_k;
  if (s.primed) {
    F_k = s.F_prev;
    H_k = s.H_prev;
    s.primed = false;
  } else {
    F_k = draw_F(problem, s, s.x_curr, s.k);
    H_k = draw_H(problem, s, s.x_curr, s.k);
    s.f_draws += s.batch_size;
    s.h_draws += 1;
  }
  const Point g = assemble_direction(s, row, F_k, H_k);
  if (!g.allFinite()) {
    throw OracleError("non-finite direction at iteration " + std::to_string(s.k));
  }
  Point x_next = project(problem.set, s.x_curr - row.gamma * g);
  s.weighted_sum += row.tau * x_next;
  s.weight_total += row.tau;
  s.x_prev = std::move(s.x_curr);
  s.x_curr = std::move(x_next);
  s.F_prev = std::move(F_k);
  s.H_prev = std::move(H_k);
  s.eta_prev = row.eta;
  ++s.k;
}

Point averaged_iterate(const SolverState& s) {
  if (s.k < 2 || !(s.weight_total > 0.0)) throw ConfigError("no completed step to average");
  return s.weighted_sum / s.weight_total;
}

std::vector<std::int64_t> checkpoint_grid(std::int64_t K, std::optional<std::int64_t> cadence) {
  if (K < 2) throw ConfigError("horizon K must be at least 2");
  std::vector<std::int64_t> grid;
  if (cadence) {
    if (*cadence < 1 || *cadence > K) throw ConfigError("metric cadence must lie in [1, K]");
    for (std::int64_t k = *cadence; k <= K; k += *cadence) {
      if (k >= 2) grid.push_back(k);
    }
  } else {
    for (std::int64_t k = 2; k <= K; k *= 2) grid.push_back(k);
  }
  if (grid.empty() || grid.back() != K) grid.push_back(K);
  return grid;
}

RunRecord run(const ProblemInstance& problem, const RunConfig& config) {
  ScheduleOptions opts = config.schedule_options;
  opts.batch_size = effective_batch(config.policy, config.K, config.batch_size_F);
  const Schedule schedule =
      build_schedule(config.policy, problem.constants, problem.set.radius(), config.K, opts);
  return run(problem, schedule, config);
}

RunRecord run(const ProblemInstance& problem, const Schedule& schedule, const RunConfig& config) {
  const std::int64_t K = schedule.K;
  if (static_cast<std::int64_t>(schedule.rows.size()) < K - 1) {
    throw ConfigError("schedule is shorter than K - 1 rows");
  }
  const auto grid = checkpoint_grid(K, config.metric_cadence);
  const auto t_start = std::chrono::steady_clock::now();

  SolverState s = init_state(problem, schedule, config);
  RunRecord record;
  record.checkpoints.reserve(grid.size());
  std::optional<Point> previous;
  std::size_t next = 0;
  for (std::int64_t k = 1; k <= K - 1; ++k) {
    step(s, schedule.rows[static_cast<std::size_t>(k - 1)], problem);
    if (next < grid.size() && s.k == grid[next]) {
      Checkpoint cp;
      cp.k = s.k;
      cp.xbar = averaged_iterate(s);
      if (config.record_wall_time) {
        cp.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
      }
      if (config.evaluate_metrics) cp.metrics = evaluate_metrics(problem, cp.xbar, previous, config.metric_options);
      previous = cp.xbar;
      record.checkpoints.push_back(std::move(cp));
      ++next;
    }
  }
  record.final_average = averaged_iterate(s);
  record.f_draws = s.f_draws;
  record.h_draws = s.h_draws;
  return record;
}

}  // namespace ropex
