// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "ropex/errors.hpp"
#include "ropex/experiment.hpp"
#include "ropex/metrics.hpp"
#include "ropex/problems.hpp"
#include "ropex/schedules.hpp"
#include "ropex/solver.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace ropex;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double budget_seconds, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > budget_seconds) {
    o.pass = false;
    o.detail += "; over the time budget";
  }
  if (!o.pass) ++failures;
  std::printf("%s [%d] %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

double sweep_slope(const SummaryReport& s, std::string_view metric) {
  const auto& fit = s.sweep_slopes[metric_index(metric)];
  return fit ? fit->slope : std::nan("");
}

double final_mean(const HorizonSummary& h, std::string_view metric) {
  const auto& v = h.rows.back().mean[metric_index(metric)];
  return v ? *v : std::nan("");
}

bool in(double v, double lo, double hi) { return v >= lo && v <= hi; }

Point p2(double a, double b) {
  Point p(2);
  p << a, b;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---------------------------------------------------------------------------

Outcome monotone_nash_rate() {
  ExperimentConfig c;
  c.problem.id = "nash";
  c.policy = PolicyKind::MonotoneFixed;
  c.k_values = {1 << 8, 1 << 10, 1 << 12, 1 << 14};
  c.replications = 10;
  c.seed = 7;
  const auto r = run_experiment(c);
  const double s_saddle = sweep_slope(r.summary, "saddle_gap");
  const double s_dist = sweep_slope(r.summary, "dist_inner");
  return {in(s_saddle, -0.6, -0.12) && in(s_dist, -0.6, -0.12),
          "slope saddle_gap " + fmt(s_saddle) + ", dist_inner " + fmt(s_dist) + " (window [-0.6, -0.12])"};
}

Outcome strong_ordering() {
  ExperimentConfig c;
  c.problem.id = "nash-strong";
  c.k_values = {1 << 14};
  c.replications = 10;
  c.seed = 7;
  c.policy = PolicyKind::StronglyMonotone;
  const auto strong = run_experiment(c);
  c.policy = PolicyKind::MonotoneFixed;
  const auto plain = run_experiment(c);
  const auto& hs = strong.summary.horizons.back();
  const auto& hp = plain.summary.horizons.back();
  const double ds = final_mean(hs, "dist_inner"), dp = final_mean(hp, "dist_inner");
  const double os = final_mean(hs, "outer_gap"), op = final_mean(hp, "outer_gap");
  return {ds <= dp && os <= op, "dist_inner " + fmt(ds) + " vs " + fmt(dp) + ", outer_gap " + fmt(os) + " vs " +
                                    fmt(op) + " (strong vs fixed)"};
}

Outcome smooth_toy_rate() {
  ExperimentConfig c;
  c.problem.id = "skew-toy";
  c.policy = PolicyKind::SmoothDeterministic;
  c.k_values = {256, 1024, 4096, 16384};
  const auto r = run_experiment(c);
  const double s = sweep_slope(r.summary, "feasibility_gap");
  return {in(s, -0.7, -0.35), "slope feasibility_gap " + fmt(s) + " (window [-0.7, -0.35])"};
}

Outcome schedule_validity() {
  std::vector<std::pair<ProblemConstants, double>> sets;
  ProblemConstants rich;
  rich.L_F = 3.0;
  rich.L_H = 1.5;
  rich.M_F = 0.5;
  rich.M_H = 0.25;
  rich.sigma_F = 1.0;
  rich.sigma_H = 0.5;
  rich.mu_H = 0.4;
  rich.C_H = 2.0;
  rich.C_F = 5.0;
  rich.B_H = 2.0;
  rich.B_F = 5.0;
  rich.alpha = 0.7;
  rich.H_at_xstar_norm = 0.5;
  sets.emplace_back(rich, 10.0);
  ProblemConstants smooth = rich;
  smooth.M_F = smooth.M_H = smooth.sigma_F = smooth.sigma_H = 0.0;
  sets.emplace_back(smooth, 10.0);
  for (const auto& p : {nash_problem(false), nash_problem(true), sharp_skew_toy(), centered_skew_toy(2)})
    sets.emplace_back(p.constants, p.set.radius());

  int schedules = 0;
  for (auto policy : kAllPolicies) {
    int accepted = 0;
    for (const auto& [c, D] : sets) {
      try {
        check_policy_requirements(policy, c);
      } catch (const ConfigError&) {
        continue;
      }
      ++accepted;
      for (std::int64_t K : {10, 100, 1000}) {
        const auto rep = validate_conditions(build_schedule(policy, c, D, K), c);
        ++schedules;
        if (!rep.passed()) return {false, std::string(to_string(policy)) + " K=" + std::to_string(K) + " failed"};
        for (const auto& chk : rep.checks) {
          const bool equality = chk.name == "extrapolation-balance" || chk.name == "weight-balance";
          if (equality ? !(chk.worst <= kEqualityTolerance) : !(chk.worst <= 0.0))
            return {false, std::string(to_string(policy)) + " " + chk.name + " residual " + fmt(chk.worst)};
        }
      }
    }
    if (accepted == 0) return {false, std::string(to_string(policy)) + " accepted no constant set"};
  }
  return {true, std::to_string(schedules) + " schedules validated"};
}

Outcome bound_consistency() {
  ExperimentConfig c;
  c.problem.id = "skew-toy-sharp";
  c.policy = PolicyKind::MonotoneFixed;
  c.k_values = {16, 64, 256, 1024, 4096, 16384};
  const auto r = run_experiment(c);
  double worst_feas = -1e300, worst_opt = -1e300;
  for (const auto& h : r.summary.horizons) {
    if (!h.bounds || !h.bounds->optimality_lower || h.bounds->feasibility_measure != "gap")
      return {false, "bounds missing at K=" + std::to_string(h.K)};
    const double feas = final_mean(h, "feasibility_gap");
    const double opt = final_mean(h, "optimality_gap");
    worst_feas = std::max(worst_feas, feas - h.bounds->feasibility_upper);
    worst_opt = std::max(worst_opt, *h.bounds->optimality_lower - opt);
  }
  return {worst_feas <= 0.0 && worst_opt <= 0.0,
          "max(feas - upper) " + fmt(worst_feas) + ", max(lower - opt) " + fmt(worst_opt)};
}

Outcome weak_sharpness() {
  const auto nash = nash_problem(false);
  const double step = 0.05;
  const double alpha = *nash.constants.alpha;
  std::mt19937_64 rng(606);
  const Box b = nash.set.bounds();
  double worst = 1e300;
  for (int i = 0; i < 100; ++i) {
    Point x(2);
    for (int j = 0; j < 2; ++j) x[j] = std::uniform_real_distribution<double>(b.lower[j], b.upper[j])(rng);
    const double lhs = feasibility_gap_bruteforce(nash, x, step);
    const double rhs = alpha * *dist_inner(nash, x) - 10.0 * step;
    worst = std::min(worst, lhs - rhs);
  }
  return {worst >= 0.0, "min slack " + fmt(worst) + " over 100 points, alpha " + fmt(alpha)};
}

Outcome oracle_equivalence() {
  const double step = 0.05;
  const auto nash = nash_problem(false);
  const double tol_F = 2 * step * *nash.constants.C_F;
  const double tol_H = 2 * step * *nash.constants.C_H;
  std::mt19937_64 rng(707);
  const Box b = nash.set.bounds();
  ProblemInstance bare = nash;
  bare.refs.feasibility_gap = nullptr;
  bare.refs.optimality_gap = nullptr;
  double err_feas = 0.0, err_opt = 0.0, under_saddle = -1e300, over_outer = -1e300;
  for (int i = 0; i < 100; ++i) {
    Point x(2);
    for (int j = 0; j < 2; ++j) x[j] = std::uniform_real_distribution<double>(b.lower[j], b.upper[j])(rng);
    const double feas = feasibility_gap_bruteforce(bare, x, step);
    const double opt = optimality_gap_bruteforce(bare, x, step);
    err_feas = std::max(err_feas, std::abs(feas - nash.refs.feasibility_gap(x)));
    err_opt = std::max(err_opt, std::abs(opt - nash.refs.optimality_gap(x)));
    // The saddle surrogate is f evaluated at x*, i.e. alpha * dist, so it sits
    // below the feasibility gap; the optimality gap sits below the outer gap.
    under_saddle = std::max(under_saddle, nash_saddle_gap(x) - feas);
    over_outer = std::max(over_outer, opt - nash_outer_gap(x));
  }
  ProblemInstance id1;
  id1.set = FeasibleSet::box(Point::Zero(1), Point::Ones(1));
  id1.inner = StochasticOracle([](const Point& x) -> Point { return x; }, NoNoise{}, 0.0);
  id1.outer = id1.inner;
  const double quarter = feasibility_gap_bruteforce(id1, Point::Ones(1), step);
  const double err_q = std::abs(quarter - 0.25);
  return {err_feas <= tol_F && err_opt <= tol_H && under_saddle <= tol_F && over_outer <= tol_H &&
              err_q <= 2 * step * 1.0,
          "|brute - closed form| feas " + fmt(err_feas) + " <= " + fmt(tol_F) + ", opt " + fmt(err_opt) + " <= " +
              fmt(tol_H) + "; saddle - feas " + fmt(under_saddle) + ", opt - outer " + fmt(over_outer) +
              "; 1-D gap " + fmt(quarter)};
}

Outcome reductions() {
  const auto nash = nash_problem(false);
  ProblemInstance det = nash;
  det.inner = nash.inner.without_noise();
  det.outer = nash.outer.without_noise();

  Schedule plain;
  plain.K = 1001;
  plain.D_X = nash.set.radius();
  for (std::int64_t k = 1; k <= 1000; ++k) plain.rows.push_back(ScheduleRow{k, 1.0, 0.0, 0.0, 0.02});
  RunConfig cfg;
  cfg.start = p2(47, 13);
  auto s = init_state(det, plain, cfg);
  Point x = project(det.set, *cfg.start);
  bool bitwise = true;
  for (const auto& row : plain.rows) {
    step(s, row, det);
    x = project(det.set, x - 0.02 * det.inner.mean(x));
    bitwise = bitwise && s.x_curr == x;
  }

  const double eta = 0.3, gamma = 0.05;
  Schedule ext = plain;
  for (auto& r : ext.rows) r = ScheduleRow{r.k, 1.0, 1.0, eta, gamma};
  const auto O = [&](const Point& y) -> Point { return det.inner.mean(y) + eta * det.outer.mean(y); };
  auto t = init_state(det, ext, cfg);
  Point prev = t.x_curr;
  double worst = 0.0;
  for (const auto& row : ext.rows) {
    const Point expected = 2 * O(t.x_curr) - O(prev);
    const Point g = assemble_direction(t, row, det.inner.mean(t.x_curr), det.outer.mean(t.x_curr));
    worst = std::max(worst, (g - expected).norm() / (1.0 + expected.norm()));
    prev = t.x_curr;
    step(t, row, det);
  }
  return {bitwise && worst <= 1e-12,
          std::string("(a) ") + (bitwise ? "bitwise match" : "mismatch") + " over 1000 steps, (b) max rel error " +
              fmt(worst)};
}

Outcome traffic() {
  ExperimentConfig c;
  c.problem.id = "traffic";
  c.policy = PolicyKind::MonotoneFixed;
  c.k_values = {256, 512, 1024, 2048, 4096, 8192, 16384};
  c.replications = 10;
  c.seed = 3;
  const auto problem = prepare_problem(c);
  const double residual = lcp_residual_phi(problem, *problem.refs.inner_reference);
  const auto r = run_experiment(c);
  const auto& hz = r.summary.horizons;
  double worst_ratio = 0.0;
  for (std::size_t i = 1; i < hz.size(); ++i)
    worst_ratio = std::max(worst_ratio, final_mean(hz[i], "lcp_phi") / final_mean(hz[i - 1], "lcp_phi"));
  const double d0 = final_mean(hz.front(), "dist_inner");
  const double d1 = final_mean(hz.back(), "dist_inner");
  return {residual <= 1e-6 && worst_ratio <= 1.05 && d1 <= 0.25 * d0,
          "reference phi " + fmt(residual) + ", lcp_phi " + fmt(final_mean(hz.front(), "lcp_phi")) + " -> " +
              fmt(final_mean(hz.back(), "lcp_phi")) + " (max ratio " + fmt(worst_ratio) + "), distance " + fmt(d0) +
              " -> " + fmt(d1)};
}

Outcome batch_variance() {
  const auto nash = nash_problem(false);
  const StochasticOracle gauss([](const Point& x) -> Point { return x; }, AdditiveGaussian{Point::Ones(3)}, 3.0);
  std::string detail;
  bool ok = true;
  const Point x3 = Point::Constant(3, 0.5);
  for (const auto* oracle : {&nash.inner, &gauss}) {
    const Point x = oracle == &gauss ? x3 : p2(31, 7);
    const Point mean = oracle->mean(x);
    const double sigma2 = oracle->variance_bound();
    for (std::uint64_t B : {1u, 10u, 100u}) {
      const int reps = 10000;
      double sq = 0.0;
      for (int r = 0; r < reps; ++r)
        sq += (sample_batch(*oracle, x, SeededStream{99, 0, OperatorTag::Inner, std::uint64_t(r + 1)}, B) - mean)
                  .squaredNorm();
      const double ratio = sq / reps / (sigma2 / double(B));
      ok = ok && ratio <= 1.2;
      detail += (detail.empty() ? "" : ", ") + std::string("B=") + std::to_string(B) + " " + fmt(ratio);
    }
  }
  return {ok, "variance / (sigma^2/B): " + detail};
}

Outcome reproducibility() {
  const fs::path root = fs::temp_directory_path() / "ropex_acceptance_repro";
  fs::remove_all(root);
  ExperimentConfig c;
  c.problem.id = "nash";
  c.k_values = {256, 1024};
  c.replications = 6;
  c.seed = 42;
  struct Variant {
    std::string name;
    int workers;
    bool serial;
  };
  const std::vector<Variant> variants = {{"w1", 1, false}, {"w3", 3, false}, {"all", 0, false}, {"serial", 1, true}};
  for (const auto& v : variants) {
    c.output_dir = (root / v.name).string();
    c.workers = v.workers;
    run_experiment(c, v.serial);
  }
  int compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root / "w1")) {
    const auto name = entry.path().filename();
    if (name != "run.csv" && name != "aggregate.csv") continue;
    const auto rel = fs::relative(entry.path(), root / "w1");
    const std::string ref = slurp(entry.path());
    for (const auto& v : variants) {
      if (slurp(root / v.name / rel) != ref) return {false, rel.string() + " differs for " + v.name};
    }
    ++compared;
  }
  fs::remove_all(root);
  return {compared == 2 * 6 + 2, std::to_string(compared) + " files byte-identical across 4 layouts"};
}

}  // namespace

int main() {
  criterion(1, "monotone Nash rate", 300, monotone_nash_rate);
  criterion(2, "strongly monotone ordering", 120, strong_ordering);
  criterion(3, "smooth deterministic toy rate", 60, smooth_toy_rate);
  criterion(4, "schedule validity", 60, schedule_validity);
  criterion(5, "bound consistency", 60, bound_consistency);
  criterion(6, "weak sharpness inequality", 60, weak_sharpness);
  criterion(7, "oracle equivalence", 60, oracle_equivalence);
  criterion(8, "reductions", 60, reductions);
  criterion(9, "traffic", 600, traffic);
  criterion(10, "mini-batch variance", 60, batch_variance);
  criterion(11, "reproducibility", 120, reproducibility);
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
