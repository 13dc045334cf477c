#include "ropex/experiment.hpp"

#include "ropex/csv.hpp"
#include "ropex/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <omp.h>

namespace ropex {

namespace fs = std::filesystem;

ProblemInstance prepare_problem(const ExperimentConfig& config) {
  ProblemInstance p = make_problem(config.problem);
  apply_constant_overrides(p.constants, config.constant_overrides);
  if (config.start && config.start->size() != p.dim()) {
    throw ConfigError("start has " + std::to_string(config.start->size()) + " coordinates, problem has " +
                      std::to_string(p.dim()));
  }
  if (!p.refs.inner_solution_set && !p.refs.inner_reference) {
    ReferenceOptions ro;
    ro.max_iterations = config.reference_max_iterations;
    ro.tolerance = config.reference_tolerance;
    const ReferenceResult inner = reference_solution(p, ro);
    p.refs.inner_reference = inner.x;
    p.refs.inner_reference_residual = inner.residual;
    if (!p.refs.outer_solution && p.refs.outer_objective && config.reference_eta > 0.0) {
      ro.eta_small = config.reference_eta;
      ro.start = inner.x;
      p.refs.outer_solution = reference_solution(p, ro).x;
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

RunTable to_table(const RunRecord& record) {
  RunTable t;
  for (const auto& cp : record.checkpoints) {
    t.k.push_back(cp.k);
    t.wall_seconds.push_back(cp.wall_seconds);
    t.xbar.push_back(cp.xbar);
    t.metrics.push_back(cp.metrics);
  }
  return t;
}

namespace {

struct MeanStderr {
  std::optional<double> mean;
  std::optional<double> stderr_;
};

MeanStderr mean_stderr(const std::vector<std::optional<double>>& values) {
  MeanStderr out;
  if (values.empty()) return out;
  for (const auto& v : values) {
    if (!v) return out;
  }
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (const auto& v : values) sum += *v;
  const double mean = sum / n;
  double ss = 0.0;
  for (const auto& v : values) ss += (*v - mean) * (*v - mean);
  out.mean = mean;
  out.stderr_ = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
  return out;
}

}  // namespace

std::vector<AggregateRow> aggregate(const std::vector<RunTable>& runs) {
  if (runs.empty()) throw ConfigError("nothing to aggregate");
  const auto& ks = runs.front().k;
  for (const auto& r : runs) {
    if (r.k != ks) throw ConfigError("replications have mismatched checkpoint grids");
  }
  std::vector<AggregateRow> rows(ks.size());
  std::vector<std::optional<double>> column(runs.size());
  for (std::size_t j = 0; j < ks.size(); ++j) {
    AggregateRow& row = rows[j];
    row.k = ks[j];
    for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
      for (std::size_t r = 0; r < runs.size(); ++r) column[r] = runs[r].metrics[j][m];
      const auto ms = mean_stderr(column);
      row.mean[m] = ms.mean;
      row.stderr_[m] = ms.stderr_;
    }
    for (std::size_t r = 0; r < runs.size(); ++r) column[r] = runs[r].wall_seconds[j];
    row.mean_wall_seconds = mean_stderr(column).mean;
  }
  return rows;
}

MetricSlopes fit_slopes(
    const std::vector<std::pair<double, std::array<std::optional<double>, kMetricNames.size()>>>& series) {
  MetricSlopes slopes{};
  for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& [k, values] : series) {
      if (values[m] && *values[m] > 0.0) pts.emplace_back(k, *values[m]);
    }
    if (pts.size() >= 3) slopes[m] = loglog_rate_fit(pts);
  }
  return slopes;
}

// ---------------------------------------------------------------------------
// CSV I/O
// ---------------------------------------------------------------------------

namespace {

std::string run_header(Eigen::Index dim) {
  std::string h = "k,wall_seconds";
  for (Eigen::Index i = 0; i < dim; ++i) h += ",xbar_" + std::to_string(i);
  for (auto name : kMetricNames) h += "," + std::string(name);
  return h;
}

}  // namespace

void write_run_csv(std::ostream& os, const RunTable& t) {
  const Eigen::Index dim = t.xbar.empty() ? 0 : t.xbar.front().size();
  os << run_header(dim) << '\n';
  for (std::size_t j = 0; j < t.k.size(); ++j) {
    os << t.k[j] << ',' << csv::number_or_na(t.wall_seconds[j]);
    for (Eigen::Index i = 0; i < dim; ++i) os << ',' << csv::number(t.xbar[j][i]);
    for (std::size_t m = 0; m < kMetricNames.size(); ++m) os << ',' << csv::number_or_na(t.metrics[j][m]);
    os << '\n';
  }
}

RunTable read_run_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("run.csv is empty");
  const auto header = csv::split(line, ',');
  const std::size_t fixed = 2 + kMetricNames.size();
  if (header.size() < fixed) throw ConfigError("run.csv header is too short");
  const auto dim = static_cast<Eigen::Index>(header.size() - fixed);
  if (line != run_header(dim)) throw ConfigError("run.csv header does not match the schema");

  RunTable t;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (csv::trim(line).empty()) continue;
    const auto cells = csv::split(line, ',');
    if (cells.size() != header.size()) {
      throw ConfigError("run.csv line " + std::to_string(lineno) + " has the wrong number of cells");
    }
    t.k.push_back(static_cast<std::int64_t>(csv::parse_number(cells[0])));
    t.wall_seconds.push_back(csv::parse_number_or_na(cells[1]));
    Point x(dim);
    for (Eigen::Index i = 0; i < dim; ++i) x[i] = csv::parse_number(cells[static_cast<std::size_t>(2 + i)]);
    t.xbar.push_back(x);
    MetricValues mv;
    for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
      mv[m] = csv::parse_number_or_na(cells[static_cast<std::size_t>(2 + dim) + m]);
    }
    t.metrics.push_back(mv);
  }
  return t;
}

void write_aggregate_csv(std::ostream& os, const std::vector<AggregateRow>& rows) {
  os << "k";
  for (auto name : kMetricNames) os << ",mean_" << name << ",stderr_" << name;
  os << ",mean_wall_seconds\n";
  for (const auto& r : rows) {
    os << r.k;
    for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
      os << ',' << csv::number_or_na(r.mean[m]) << ',' << csv::number_or_na(r.stderr_[m]);
    }
    os << ',' << csv::number_or_na(r.mean_wall_seconds) << '\n';
  }
}

void write_sweep_csv(std::ostream& os, const SummaryReport& report) {
  os << "K,final_k";
  for (auto name : kMetricNames) os << ",mean_" << name << ",stderr_" << name;
  os << ",optimality_upper,feasibility_upper,optimality_lower,feasibility_measure,min_admissible_k,horizon_ok\n";
  for (const auto& h : report.horizons) {
    const AggregateRow& last = h.rows.back();
    os << h.K << ',' << last.k;
    for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
      os << ',' << csv::number_or_na(last.mean[m]) << ',' << csv::number_or_na(last.stderr_[m]);
    }
    if (h.bounds) {
      os << ',' << csv::number(h.bounds->optimality_upper) << ',' << csv::number(h.bounds->feasibility_upper)
         << ',' << csv::number_or_na(h.bounds->optimality_lower) << ',' << h.bounds->feasibility_measure;
    } else {
      os << ",NA,NA,NA,NA";
    }
    os << ',' << (h.validation.min_admissible_k ? std::to_string(*h.validation.min_admissible_k) : "NA") << ','
       << (h.validation.horizon_ok ? "true" : "false") << '\n';
  }
}

namespace {

void write_slopes(std::ostream& os, const MetricSlopes& slopes, const char* indent) {
  bool any = false;
  for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
    if (!slopes[m]) continue;
    any = true;
    os << indent << kMetricNames[m] << ": slope " << csv::number(slopes[m]->slope) << ", intercept "
       << csv::number(slopes[m]->intercept) << '\n';
  }
  if (!any) os << indent << "(fewer than three positive points for every metric)\n";
}

}  // namespace

void write_summary(std::ostream& os, const SummaryReport& r, bool with_wall_time) {
  os << "problem: " << r.problem_id << '\n';
  os << "policy: " << to_string(r.policy) << '\n';
  for (const auto& w : r.warnings) os << "warning: " << w << '\n';
  for (const auto& h : r.horizons) {
    os << "\nK = " << h.K << '\n';
    os << "  schedule conditions: " << (h.validation.passed() ? "pass" : "FAIL") << '\n';
    for (const auto& c : h.validation.checks) {
      os << "    " << c.name << ": " << (c.passed ? "pass" : "fail");
      if (c.first_violation) os << " (first violation at k=" << *c.first_violation << ')';
      os << ", worst residual " << csv::number(c.worst) << '\n';
    }
    if (h.validation.min_admissible_k) {
      os << "    minimal admissible K: " << *h.validation.min_admissible_k
         << (h.validation.horizon_ok ? "" : " (horizon below it)") << '\n';
    }
    if (h.bounds) {
      os << "  bounds: optimality_upper " << csv::number(h.bounds->optimality_upper) << ", "
         << h.bounds->feasibility_measure << "_upper " << csv::number(h.bounds->feasibility_upper)
         << ", optimality_lower " << csv::number_or_na(h.bounds->optimality_lower) << '\n';
    }
    const AggregateRow& last = h.rows.back();
    os << "  final checkpoint k=" << last.k << '\n';
    for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
      os << "    " << kMetricNames[m] << ": " << csv::number_or_na(last.mean[m]) << " +- "
         << csv::number_or_na(last.stderr_[m]) << '\n';
    }
    os << "  checkpoint slopes:\n";
    write_slopes(os, h.checkpoint_slopes, "    ");
    if (with_wall_time) os << "  wall seconds: " << csv::number(h.wall_seconds) << '\n';
  }
  if (r.horizons.size() >= 3) {
    os << "\nsweep slopes (final means vs K):\n";
    write_slopes(os, r.sweep_slopes, "  ");
  }
}

// ---------------------------------------------------------------------------
// Drivers
// ---------------------------------------------------------------------------

namespace {

std::string describe_violation(const ValidationReport& v) {
  std::string msg = "schedule for policy " + std::string(to_string(v.policy)) + " violates";
  for (const auto& c : v.checks) {
    if (c.passed) continue;
    msg += " " + c.name;
    if (c.first_violation) msg += " (first at k=" + std::to_string(*c.first_violation) + ")";
  }
  return msg;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
}

template <class Fn>
std::string render(Fn&& fn) {
  std::ostringstream ss;
  fn(ss);
  return ss.str();
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, bool serial) {
  config.validate();
  const ProblemInstance problem = prepare_problem(config);
  check_policy_requirements(config.policy, problem.constants);
  const double D_X = problem.set.radius();

  ExperimentResult result;
  SummaryReport& summary = result.summary;
  summary.problem_id = problem.id;
  summary.policy = config.policy;
  if (problem.refs.inner_reference_residual) {
    summary.warnings.push_back("inner reference computed numerically, residual " +
                               csv::number(*problem.refs.inner_reference_residual));
  }
  if (!problem.notes.empty()) summary.warnings.push_back("problem notes: " + problem.notes);

  const fs::path out_dir = config.output_dir;
  const bool write = !config.output_dir.empty();
  if (write) {
    fs::create_directories(out_dir);
    write_file(out_dir / "config.txt", render([&](std::ostream& os) { write_config(os, config); }));
  }

  std::string timing = "K,replication,wall_seconds\n";
  const std::uint64_t R = config.replications;

  for (const std::int64_t K : config.k_values) {
    ScheduleOptions so;
    so.eta_override = config.eta_override;
    so.batch_size = effective_batch(config.policy, K, config.batch_size);
    const Schedule schedule = build_schedule(config.policy, problem.constants, D_X, K, so);

    HorizonSummary h;
    h.K = K;
    h.validation = validate_conditions(schedule, problem.constants);
    if (!h.validation.passed()) throw ScheduleViolation(describe_violation(h.validation));
    if (!h.validation.horizon_ok) {
      summary.warnings.push_back("K=" + std::to_string(K) + " is below the minimal admissible horizon " +
                                 std::to_string(*h.validation.min_admissible_k) +
                                 " of the strongly monotone analysis");
    }
    try {
      BoundInputs bi;
      bi.D_X = D_X;
      bi.eta = config.eta_override;
      h.bounds = theoretical_bounds(config.policy, problem.constants, bi, K);
    } catch (const ConfigError& e) {
      summary.warnings.push_back("K=" + std::to_string(K) + ": bounds unavailable (" + e.what() + ")");
    }

    RunConfig rc;
    rc.K = K;
    rc.policy = config.policy;
    rc.batch_size_F = so.batch_size;
    rc.metric_cadence = config.metric_cadence;
    rc.seed = config.seed;
    rc.start = config.start;
    rc.schedule_options = so;
    rc.metric_options.grid_step = config.grid_step;
    rc.metric_options.parallel = serial;  // no nested teams inside parallel replications
    rc.record_wall_time = config.record_wall_time;

    std::vector<RunRecord> records(R);
    std::vector<std::exception_ptr> errors(R);
    const auto t0 = std::chrono::steady_clock::now();
    const auto one = [&](std::uint64_t r) {
      try {
        RunConfig local = rc;
        local.replication = r;
        records[r] = run(problem, schedule, local);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    };
    if (serial) {
      for (std::uint64_t r = 0; r < R; ++r) one(r);
    } else {
      const int threads = config.workers > 0 ? config.workers : omp_get_max_threads();
#pragma omp parallel for num_threads(threads) schedule(dynamic, 1)
      for (std::int64_t r = 0; r < static_cast<std::int64_t>(R); ++r) one(static_cast<std::uint64_t>(r));
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    h.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::vector<RunTable> tables;
    tables.reserve(R);
    for (const auto& rec : records) tables.push_back(to_table(rec));
    h.rows = aggregate(tables);
    std::vector<std::pair<double, std::array<std::optional<double>, kMetricNames.size()>>> series;
    for (const auto& row : h.rows) series.emplace_back(static_cast<double>(row.k), row.mean);
    h.checkpoint_slopes = fit_slopes(series);

    if (write) {
      const fs::path kdir = out_dir / ("K" + std::to_string(K));
      for (std::uint64_t r = 0; r < R; ++r) {
        const fs::path rdir = kdir / ("rep" + std::to_string(r));
        fs::create_directories(rdir);
        write_file(rdir / "run.csv", render([&](std::ostream& os) { write_run_csv(os, tables[r]); }));
      }
      write_file(kdir / "aggregate.csv", render([&](std::ostream& os) { write_aggregate_csv(os, h.rows); }));
    }
    for (std::uint64_t r = 0; r < R; ++r) {
      const auto& w = records[r].checkpoints.back().wall_seconds;
      timing += std::to_string(K) + "," + std::to_string(r) + "," + csv::number_or_na(w) + "\n";
    }
    summary.horizons.push_back(std::move(h));
    result.records.push_back(std::move(records));
  }

  std::vector<std::pair<double, std::array<std::optional<double>, kMetricNames.size()>>> finals;
  for (const auto& h : summary.horizons) finals.emplace_back(static_cast<double>(h.K), h.rows.back().mean);
  summary.sweep_slopes = fit_slopes(finals);

  if (write) {
    write_file(out_dir / "sweep.csv", render([&](std::ostream& os) { write_sweep_csv(os, summary); }));
    write_file(out_dir / "summary.txt",
               render([&](std::ostream& os) { write_summary(os, summary, config.record_wall_time); }));
    if (config.record_wall_time) write_file(out_dir / "timing.csv", timing);
  }
  return result;
}

std::vector<AggregateRow> summarize_directory(const std::string& k_dir) {
  std::vector<std::pair<std::uint64_t, fs::path>> reps;
  if (!fs::is_directory(k_dir)) throw ConfigError("not a directory: " + k_dir);
  for (const auto& entry : fs::directory_iterator(k_dir)) {
    const std::string name = entry.path().filename().string();
    if (!entry.is_directory() || name.rfind("rep", 0) != 0) continue;
    const fs::path file = entry.path() / "run.csv";
    if (!fs::exists(file)) continue;
    try {
      reps.emplace_back(std::stoull(name.substr(3)), file);
    } catch (const std::exception&) {
      continue;
    }
  }
  if (reps.empty()) throw ConfigError("no rep*/run.csv files below " + k_dir);
  std::sort(reps.begin(), reps.end());
  std::vector<RunTable> tables;
  for (const auto& [idx, file] : reps) {
    std::ifstream in(file);
    tables.push_back(read_run_csv(in));
  }
  return aggregate(tables);
}

}  // namespace ropex
