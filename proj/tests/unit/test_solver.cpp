#include "ropex/errors.hpp"
#include "ropex/solver.hpp"
#include "support/generators.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace ropex;
using ropex::testing::Gen;

namespace {

Point p2(double a, double b) {
  Point p(2);
  p << a, b;
  return p;
}

ProblemInstance custom(MeanMap F, MeanMap H, const Box& box) {
  ProblemInstance p;
  p.id = "custom";
  p.set = FeasibleSet::box(box.lower, box.upper);
  p.inner = StochasticOracle(std::move(F), NoNoise{}, 0.0);
  p.outer = StochasticOracle(std::move(H), NoNoise{}, 0.0);
  p.constants.L_F = 1.0;
  p.start = p.set.center();
  return p;
}

Schedule custom_schedule(std::vector<ScheduleRow> rows) {
  Schedule s;
  s.K = static_cast<std::int64_t>(rows.size()) + 1;
  s.D_X = 1.0;
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].k = static_cast<std::int64_t>(i + 1);
  s.rows = std::move(rows);
  return s;
}

ScheduleRow row(double gamma, double eta = 0.0, double theta = 0.0, double tau = 1.0) {
  ScheduleRow r;
  r.gamma = gamma;
  r.eta = eta;
  r.theta = theta;
  r.tau = tau;
  return r;
}

const Box square10{p2(-10, -10), p2(10, 10)};

MeanMap identity() {
  return [](const Point& x) -> Point { return x; };
}

MeanMap zero_map() {
  return [](const Point& x) -> Point { return Point::Zero(x.size()); };
}

MeanMap constant_map(Point c) {
  return [c](const Point&) -> Point { return c; };
}

bool same_record(const RunRecord& a, const RunRecord& b) {
  if (a.checkpoints.size() != b.checkpoints.size() || a.final_average != b.final_average) return false;
  for (std::size_t i = 0; i < a.checkpoints.size(); ++i) {
    if (a.checkpoints[i].k != b.checkpoints[i].k || a.checkpoints[i].xbar != b.checkpoints[i].xbar) return false;
    if (a.checkpoints[i].metrics.values != b.checkpoints[i].metrics.values) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("init state") {
  const auto nash = nash_problem(false);
  const auto sched = build_schedule(PolicyKind::MonotoneFixed, nash.constants, nash.set.radius(), 10);
  RunConfig cfg;
  const auto s = init_state(nash, sched, cfg);
  CHECK(s.x_curr == p2(35, 10));
  CHECK(s.x_prev == s.x_curr);
  CHECK(s.eta_prev == sched.rows[0].eta);
  CHECK(s.primed);
  cfg.start = p2(0, 0);
  const auto s0 = init_state(nash, sched, cfg);
  CHECK(s0.x_curr == p2(20, 5));
  // The first bracket vanishes: g₁ = F₁ + η₁H₁.
  const Point g = assemble_direction(s0, sched.rows[0], s0.F_prev, s0.H_prev);
  CHECK(g == Point(s0.F_prev + sched.rows[0].eta * s0.H_prev));
  cfg.start = Point::Zero(3);
  CHECK_THROWS_AS(init_state(nash, sched, cfg), ConfigError);
  CHECK_THROWS_AS(init_state(nash, Schedule{}, RunConfig{}), ConfigError);
}

TEST_CASE("direction assembly") {
  SolverState s;
  s.F_prev = p2(0, 0);
  s.H_prev = p2(0, 0);
  s.eta_prev = 0.0;
  CHECK(assemble_direction(s, row(1.0, 0.0, 1.0), p2(1, 1), p2(0, 0)) == p2(2, 2));
  CHECK(assemble_direction(s, row(1.0, 0.5, 0.0), p2(1, 1), p2(2, 4)) == p2(2, 3));
  s.F_prev = p2(1, 0);
  s.H_prev = p2(0, 2);
  s.eta_prev = 0.5;
  // F + ηH + θ[F + η_prev H − F_prev − η_prev H_prev] by hand.
  const Point g = assemble_direction(s, row(1.0, 0.25, 0.5), p2(3, 1), p2(4, 0));
  CHECK(g[0] == doctest::Approx(3 + 1 + 0.5 * (3 + 2 - 1)));
  CHECK(g[1] == doctest::Approx(1 + 0 + 0.5 * (1 - 1)));
}

TEST_CASE("one projected step") {
  const auto p = custom(identity(), zero_map(), square10);
  RunConfig cfg;
  cfg.start = p2(1, 0);
  const auto sched = custom_schedule({row(1.0)});
  auto s = init_state(p, sched, cfg);
  step(s, sched.rows[0], p);
  CHECK(s.x_curr == p2(0, 0));
  CHECK(s.x_prev == p2(1, 0));
  CHECK(averaged_iterate(s) == p2(0, 0));
  CHECK(s.k == 2);
  // Projection clamps a long step.
  const auto far = custom(constant_map(p2(-100, 0)), zero_map(), square10);
  auto t = init_state(far, sched, cfg);
  step(t, sched.rows[0], far);
  CHECK(t.x_curr == p2(10, 0));
}

TEST_CASE("averaging") {
  SUBCASE("uniform weights") {
    const auto p = custom(constant_map(p2(-2, 0)), zero_map(), square10);
    RunConfig cfg;
    cfg.start = p2(-2, 0);
    const auto sched = custom_schedule({row(1.0), row(1.0), row(1.0)});
    auto s = init_state(p, sched, cfg);
    CHECK_THROWS_AS(averaged_iterate(s), ConfigError);
    step(s, sched.rows[0], p);
    CHECK(averaged_iterate(s) == p2(0, 0));
    step(s, sched.rows[1], p);
    step(s, sched.rows[2], p);
    CHECK(s.x_curr == p2(4, 0));
    CHECK(averaged_iterate(s) == p2(2, 0));
  }
  SUBCASE("increasing weights") {
    const Box line{Point::Constant(1, -10), Point::Constant(1, 10)};
    const auto p = custom(constant_map(Point::Constant(1, -1)), zero_map(), line);
    RunConfig cfg;
    cfg.start = Point::Zero(1);
    const auto sched = custom_schedule({row(1.0, 0, 0, 2.0), row(3.0, 0, 0, 3.0)});
    auto s = init_state(p, sched, cfg);
    step(s, sched.rows[0], p);
    step(s, sched.rows[1], p);
    CHECK(s.x_curr[0] == 4.0);
    CHECK(averaged_iterate(s)[0] == doctest::Approx(2.8));
    CHECK(s.weight_total == 5.0);
  }
}

TEST_CASE("a non-finite direction is an oracle error") {
  const auto p = custom(constant_map(p2(std::numeric_limits<double>::quiet_NaN(), 0)), zero_map(), square10);
  const auto sched = custom_schedule({row(1.0)});
  auto s = init_state(p, sched, RunConfig{});
  CHECK_THROWS_AS(step(s, sched.rows[0], p), OracleError);
}

TEST_CASE("checkpoint grids") {
  CHECK(checkpoint_grid(10, std::nullopt) == std::vector<std::int64_t>{2, 4, 8, 10});
  CHECK(checkpoint_grid(16, std::nullopt) == std::vector<std::int64_t>{2, 4, 8, 16});
  CHECK(checkpoint_grid(10, 3) == std::vector<std::int64_t>{3, 6, 9, 10});
  CHECK(checkpoint_grid(4, 1) == std::vector<std::int64_t>{2, 3, 4});
  CHECK(checkpoint_grid(2, std::nullopt) == std::vector<std::int64_t>{2});
  CHECK_THROWS_AS(checkpoint_grid(10, 0), ConfigError);
  CHECK_THROWS_AS(checkpoint_grid(10, 11), ConfigError);
  CHECK_THROWS_AS(checkpoint_grid(1, std::nullopt), ConfigError);
}

TEST_CASE("single-evaluation property") {
  const auto nash = nash_problem(false);
  RunConfig cfg;
  cfg.K = 100;
  cfg.evaluate_metrics = false;
  auto r = run(nash, cfg);
  CHECK(r.h_draws == 99);
  CHECK(r.f_draws == 99);
  cfg.batch_size_F = 3;
  r = run(nash, cfg);
  CHECK(r.h_draws == 99);
  CHECK(r.f_draws == 297);

  const auto toy = centered_skew_toy(2, 0.5, 0.5);
  RunConfig mb;
  mb.K = 50;
  mb.policy = PolicyKind::SmoothStochasticMiniBatch;
  mb.evaluate_metrics = false;
  r = run(toy, mb);
  CHECK(r.f_draws == 49u * 50u);
  CHECK(r.h_draws == 49);
  CHECK(effective_batch(PolicyKind::MonotoneFixed, 50, std::nullopt) == 1);
  CHECK_THROWS_AS(effective_batch(PolicyKind::MonotoneFixed, 50, 0), ConfigError);
}

TEST_CASE("runs are feasible, structured and deterministic") {
  const auto nash = nash_problem(false);
  RunConfig cfg;
  cfg.K = 10000;
  cfg.seed = 17;
  cfg.metric_cadence = 100;
  const auto a = run(nash, cfg);
  CHECK(a.checkpoints.size() == 100);
  CHECK(a.checkpoints.back().k == 10000);
  CHECK(a.final_average == a.checkpoints.back().xbar);
  for (const auto& cp : a.checkpoints) {
    CHECK(distance(nash.set, cp.xbar) <= 1e-12);
    CHECK(cp.metrics.get("saddle_gap"));
    CHECK_FALSE(cp.wall_seconds);
  }
  CHECK_FALSE(a.checkpoints.front().metrics.get("iterate_drift"));
  CHECK(a.checkpoints.back().metrics.get("iterate_drift"));
  CHECK(same_record(a, run(nash, cfg)));
  RunConfig other = cfg;
  other.replication = 1;
  CHECK_FALSE(same_record(a, run(nash, other)));
  RunConfig timed = cfg;
  timed.record_wall_time = true;
  const auto t = run(nash, timed);
  CHECK(t.checkpoints.back().wall_seconds);
  CHECK(t.final_average == a.final_average);
}

TEST_CASE("traffic runs stay in the capped box") {
  const auto traffic = traffic_problem();
  RunConfig cfg;
  cfg.K = 2000;
  cfg.seed = 5;
  const auto r = run(traffic, cfg);
  for (const auto& cp : r.checkpoints) {
    CHECK(distance(traffic.set, cp.xbar) <= 1e-12);
    CHECK(cp.metrics.get("lcp_phi"));
  }
}

TEST_CASE("reduction: no extrapolation, no regularization is a projected operator iteration") {
  const auto nash = nash_problem(false);
  std::vector<ScheduleRow> rows(200, row(0.01));
  const auto sched = custom_schedule(rows);
  RunConfig cfg;
  cfg.seed = 3;
  cfg.replication = 2;
  auto s = init_state(nash, sched, cfg);
  Point x = s.x_curr;
  for (std::int64_t k = 1; k <= 200; ++k) {
    step(s, sched.rows[static_cast<std::size_t>(k - 1)], nash);
    const Point Fk = sample(nash.inner, x, SeededStream{3, 2, OperatorTag::Inner, std::uint64_t(k)});
    x = project(nash.set, x - 0.01 * Fk);
    REQUIRE(s.x_curr == x);
  }
}

TEST_CASE("reduction: constant eta with unit weights is operator extrapolation") {
  const auto nash = nash_problem(false);
  const StochasticOracle F = nash.inner.without_noise();
  const StochasticOracle H = nash.outer.without_noise();
  ProblemInstance det = nash;
  det.inner = F;
  det.outer = H;
  const double eta = 0.3, gamma = 0.05;
  std::vector<ScheduleRow> rows(300, row(gamma, eta, 1.0));
  const auto sched = custom_schedule(rows);
  const auto O = [&](const Point& x) -> Point { return F.mean(x) + eta * H.mean(x); };
  RunConfig cfg;
  cfg.start = p2(48, 14);
  auto s = init_state(det, sched, cfg);
  Point prev = s.x_curr, curr = s.x_curr;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Point g_expected = 2 * O(curr) - O(prev);
    const Point g = assemble_direction(s, sched.rows[i], F.mean(s.x_curr), H.mean(s.x_curr));
    CHECK((g - g_expected).norm() <= 1e-12 * (1 + g_expected.norm()));
    step(s, sched.rows[i], det);
    prev = curr;
    curr = project(det.set, curr - gamma * g_expected);
    CHECK((s.x_curr - curr).norm() <= 1e-12 * (1 + curr.norm()));
    curr = s.x_curr;
  }
}

TEST_CASE("the projected step solves the prox subproblem") {
  const auto nash = nash_problem(false);
  const Box X = nash.set.bounds();
  Gen g(44);
  // Separable objective, so each coordinate's grid minimizer can be found on its own.
  const auto grid_argmin = [&](double xk, double gi, double gamma, double lo, double hi, double step) {
    double best = std::numeric_limits<double>::infinity(), arg = lo;
    const auto n = static_cast<std::int64_t>(std::ceil((hi - lo) / step - 1e-9));
    for (std::int64_t i = 0; i <= n; ++i) {
      const double x = std::min(hi, lo + step * double(i));
      const double v = gi * x + (x - xk) * (x - xk) / (2 * gamma);
      if (v < best) {
        best = v;
        arg = x;
      }
    }
    return arg;
  };
  for (int trial = 0; trial < 100; ++trial) {
    const Point xk = g.in_box(X);
    const Point dir = g.gaussian(2, 50.0);
    const double gamma = g.uniform(0.01, 0.5);
    const Point closed = project(nash.set, xk - gamma * dir);
    Point searched(2);
    for (Eigen::Index i = 0; i < 2; ++i) {
      const double coarse = grid_argmin(xk[i], dir[i], gamma, X.lower[i], X.upper[i], 1e-2);
      searched[i] = grid_argmin(xk[i], dir[i], gamma, std::max(X.lower[i], coarse - 0.02),
                                std::min(X.upper[i], coarse + 0.02), 1e-3);
    }
    CHECK((searched - closed).cwiseAbs().maxCoeff() <= 1e-3);
  }
}

TEST_CASE("distance to the fixed point shrinks with the horizon") {
  const auto toy = centered_skew_toy(2);
  const Point c = *toy.refs.outer_solution;
  std::vector<double> dists;
  for (std::int64_t K : {100, 1000, 10000}) {
    RunConfig cfg;
    cfg.K = K;
    cfg.evaluate_metrics = false;
    dists.push_back((run(toy, cfg).final_average - c).norm());
  }
  CHECK(dists[1] <= 1.1 * dists[0]);
  CHECK(dists[2] <= 1.1 * dists[1]);
  CHECK(dists[2] < dists[0]);
}

TEST_CASE("short schedules are rejected") {
  const auto nash = nash_problem(false);
  auto sched = build_schedule(PolicyKind::MonotoneFixed, nash.constants, nash.set.radius(), 10);
  sched.rows.pop_back();
  CHECK_THROWS_AS(run(nash, sched, RunConfig{}), ConfigError);
}
