// ropex: run R-OpEx experiments, audit schedules, evaluate bounds.

#include "ropex/csv.hpp"
#include "ropex/errors.hpp"
#include "ropex/experiment.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSchedule = 3;
constexpr int kExitOracle = 4;
constexpr int kExitConvergence = 5;

std::vector<std::int64_t> parse_sweep(const std::string& s) {
  std::vector<std::int64_t> out;
  for (const auto& part : ropex::csv::split(s, ',')) {
    out.push_back(static_cast<std::int64_t>(ropex::csv::parse_number(part)));
  }
  return out;
}

void print_validation(const ropex::ValidationReport& v) {
  for (const auto& c : v.checks) {
    std::cout << c.name << ": " << (c.passed ? "pass" : "FAIL");
    if (c.first_violation) std::cout << " (first violation at k=" << *c.first_violation << ")";
    std::cout << ", worst residual " << ropex::csv::number(c.worst) << '\n';
  }
  if (v.min_admissible_k) {
    std::cout << "minimal admissible K: " << *v.min_admissible_k << '\n';
    if (!v.horizon_ok) std::cerr << "warning: K is below the minimal admissible horizon\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"R-OpEx bilevel VI solver and benchmark harness"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run a replicated experiment from a config file");
  std::string config_path, sweep, out_dir;
  std::optional<std::uint64_t> reps, seed;
  std::optional<int> workers;
  bool serial = false;
  run->add_option("--config", config_path, "key=value experiment file")->required();
  run->add_option("--k-sweep", sweep, "comma-separated horizons, overrides the config");
  run->add_option("--reps", reps, "replications");
  run->add_option("--seed", seed, "base seed");
  run->add_option("--out", out_dir, "output directory (default $ROPEX_OUT_DIR or ./ropex_out)");
  run->add_option("--workers", workers, "threads for replications (0 = all)");
  run->add_flag("--serial", serial, "run replications one after another");

  // validate-schedule / bounds share their options
  std::string policy_name, problem_id = "nash";
  std::int64_t K = 0;
  std::optional<double> eta;
  std::string schedule_csv;
  auto* validate = app.add_subcommand("validate-schedule", "check a policy's step-size conditions");
  for (auto* sub : {validate, app.add_subcommand("bounds", "evaluate the closed-form bounds")}) {
    sub->add_option("--policy", policy_name, "policy name")->required();
    sub->add_option("--k", K, "horizon")->required();
    sub->add_option("--problem", problem_id, "nash, nash-strong, traffic, traffic-strong, skew-toy, skew-toy-sharp");
    sub->add_option("--eta", eta, "eta override for the weak-sharp policies");
  }
  validate->add_option("--csv", schedule_csv, "also write the schedule rows to this file");
  auto* bounds = app.get_subcommand("bounds");

  auto* summarize = app.add_subcommand("summarize", "re-aggregate the rep*/run.csv files of one horizon");
  std::string k_dir;
  summarize->add_option("--dir", k_dir, "an output K<K> directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      ropex::ExperimentConfig cfg = ropex::load_config(config_path);
      if (!sweep.empty()) cfg.k_values = parse_sweep(sweep);
      if (reps) cfg.replications = *reps;
      if (seed) cfg.seed = *seed;
      if (workers) cfg.workers = *workers;
      if (!out_dir.empty()) {
        cfg.output_dir = out_dir;
      } else if (cfg.output_dir.empty()) {
        const char* env = std::getenv("ROPEX_OUT_DIR");
        cfg.output_dir = env && *env ? env : "ropex_out";
      }
      const auto result = ropex::run_experiment(cfg, serial);
      ropex::write_summary(std::cout, result.summary, cfg.record_wall_time);
      std::cout << "\noutputs written to " << cfg.output_dir << '\n';
      return 0;
    }

    if (validate->parsed() || bounds->parsed()) {
      ropex::ProblemOptions po;
      po.id = problem_id;
      const ropex::ProblemInstance problem = ropex::make_problem(po);
      const ropex::PolicyKind policy = ropex::parse_policy(policy_name);
      if (validate->parsed()) {
        ropex::ScheduleOptions so;
        so.eta_override = eta;
        const auto schedule = ropex::build_schedule(policy, problem.constants, problem.set.radius(), K, so);
        if (!schedule_csv.empty()) {
          std::ofstream out(schedule_csv);
          if (!out) throw ropex::ConfigError("cannot write " + schedule_csv);
          ropex::write_schedule_csv(out, schedule);
        }
        const auto report = ropex::validate_conditions(schedule, problem.constants);
        print_validation(report);
        return report.passed() ? 0 : kExitSchedule;
      }
      ropex::BoundInputs bi;
      bi.D_X = problem.set.radius();
      bi.eta = eta;
      const auto b = ropex::theoretical_bounds(policy, problem.constants, bi, K);
      std::cout << "policy: " << ropex::to_string(b.policy) << "\nK: " << b.K << '\n'
                << b.optimality_label << ": " << ropex::csv::number(b.optimality_upper) << '\n'
                << b.feasibility_label << ": " << ropex::csv::number(b.feasibility_upper) << '\n'
                << b.lower_label << ": " << ropex::csv::number_or_na(b.optimality_lower) << '\n';
      return 0;
    }

    if (summarize->parsed()) {
      const auto rows = ropex::summarize_directory(k_dir);
      ropex::write_aggregate_csv(std::cout, rows);
      std::vector<std::pair<double, std::array<std::optional<double>, ropex::kMetricNames.size()>>> series;
      for (const auto& r : rows) series.emplace_back(static_cast<double>(r.k), r.mean);
      const auto slopes = ropex::fit_slopes(series);
      for (std::size_t m = 0; m < ropex::kMetricNames.size(); ++m) {
        if (slopes[m]) {
          std::cerr << ropex::kMetricNames[m] << " slope " << ropex::csv::number(slopes[m]->slope) << '\n';
        }
      }
      return 0;
    }
  } catch (const ropex::ConfigError& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ropex::ScheduleViolation& e) {
    std::cerr << "schedule violation: " << e.what() << '\n';
    return kExitSchedule;
  } catch (const ropex::OracleError& e) {
    std::cerr << "oracle error: " << e.what() << '\n';
    return kExitOracle;
  } catch (const ropex::ConvergenceError& e) {
    std::cerr << "reference solver: " << e.what() << '\n';
    return kExitConvergence;
  }
  return 0;
}
