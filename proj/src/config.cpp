#include "ropex/csv.hpp"
#include "ropex/errors.hpp"
#include "ropex/experiment.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace ropex {

namespace {

template <class Int>
Int parse_int(std::string_view s, const std::string& key) {
  s = csv::trim(s);
  Int v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" + std::string(s) + "'");
  }
  return v;
}

double parse_real(std::string_view s, const std::string& key) {
  try {
    return csv::parse_number(s);
  } catch (const ConfigError&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + std::string(s) + "'");
  }
}

bool parse_bool(std::string_view s, const std::string& key) {
  s = csv::trim(s);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("config key '" + key + "': expected true or false");
}

bool is_default(std::string_view s) {
  s = csv::trim(s);
  return s.empty() || s == "default";
}

std::vector<std::int64_t> parse_k_list(std::string_view s, const std::string& key) {
  std::vector<std::int64_t> out;
  for (const auto& part : csv::split(s, ',')) out.push_back(parse_int<std::int64_t>(part, key));
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (k_values.empty()) throw ConfigError("k_sweep must list at least one horizon");
  for (std::size_t i = 0; i < k_values.size(); ++i) {
    if (k_values[i] < 2) throw ConfigError("every horizon K must be at least 2");
    if (i > 0 && k_values[i] <= k_values[i - 1]) throw ConfigError("k_sweep must be strictly increasing");
  }
  if (replications < 1) throw ConfigError("replications must be at least 1");
  if (metric_cadence) {
    if (*metric_cadence < 1) throw ConfigError("metric_cadence must be positive");
    if (*metric_cadence > k_values.front()) throw ConfigError("metric_cadence must not exceed K");
  }
  if (batch_size && *batch_size == 0) throw ConfigError("batch_size must be at least 1");
  if (!(grid_step > 0.0)) throw ConfigError("grid_step must be positive");
  if (!(reference_tolerance > 0.0)) throw ConfigError("reference_tolerance must be positive");
  if (!(reference_eta >= 0.0)) throw ConfigError("reference_eta must be nonnegative");
  if (reference_max_iterations < 1) throw ConfigError("reference_max_iterations must be positive");
  if (workers < 0) throw ConfigError("workers must be nonnegative");
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string_view body = csv::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key(csv::trim(body.substr(0, eq)));
    const std::string value(csv::trim(body.substr(eq + 1)));

    if (key == "problem") {
      c.problem.id = value;
    } else if (key == "strongly_monotone") {
      c.problem.strongly_monotone = parse_bool(value, key);
    } else if (key == "mu_reg") {
      c.problem.mu_reg = parse_real(value, key);
    } else if (key == "cap_box") {
      c.problem.cap_box = parse_real(value, key);
    } else if (key == "network_file") {
      c.problem.network_file = value;
    } else if (key == "toy_dim") {
      c.problem.toy_dim = parse_int<Eigen::Index>(value, key);
    } else if (key == "toy_sigma_F") {
      c.problem.toy_sigma_F = parse_real(value, key);
    } else if (key == "toy_sigma_H") {
      c.problem.toy_sigma_H = parse_real(value, key);
    } else if (key == "policy") {
      c.policy = parse_policy(value);
    } else if (key == "K") {
      c.k_values = {parse_int<std::int64_t>(value, key)};
    } else if (key == "k_sweep") {
      c.k_values = parse_k_list(value, key);
    } else if (key == "replications") {
      c.replications = parse_int<std::uint64_t>(value, key);
    } else if (key == "seed") {
      c.seed = parse_int<std::uint64_t>(value, key);
    } else if (key == "metric_cadence") {
      if (value == "geometric") {
        c.metric_cadence.reset();
      } else {
        c.metric_cadence = parse_int<std::int64_t>(value, key);
      }
    } else if (key == "batch_size") {
      if (is_default(value)) {
        c.batch_size.reset();
      } else {
        c.batch_size = parse_int<std::uint64_t>(value, key);
      }
    } else if (key == "eta") {
      if (is_default(value)) {
        c.eta_override.reset();
      } else {
        c.eta_override = parse_real(value, key);
      }
    } else if (key == "start") {
      if (is_default(value)) {
        c.start.reset();
      } else {
        const auto parts = csv::split(value, ',');
        Point p(static_cast<Eigen::Index>(parts.size()));
        for (std::size_t i = 0; i < parts.size(); ++i) p[static_cast<Eigen::Index>(i)] = parse_real(parts[i], key);
        c.start = p;
      }
    } else if (key == "grid_step") {
      c.grid_step = parse_real(value, key);
    } else if (key == "reference_tolerance") {
      c.reference_tolerance = parse_real(value, key);
    } else if (key == "reference_eta") {
      c.reference_eta = parse_real(value, key);
    } else if (key == "reference_max_iterations") {
      c.reference_max_iterations = parse_int<std::int64_t>(value, key);
    } else if (key == "workers") {
      c.workers = parse_int<int>(value, key);
    } else if (key == "record_wall_time") {
      c.record_wall_time = parse_bool(value, key);
    } else if (key == "output_dir") {
      c.output_dir = value;
    } else if (key.rfind("const.", 0) == 0) {
      c.constant_overrides[key.substr(6)] = parse_real(value, key);
    } else {
      throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse_config(in);
}

void write_config(std::ostream& os, const ExperimentConfig& c) {
  const auto num = [](double v) { return csv::number(v); };
  os << "problem=" << c.problem.id << '\n';
  os << "strongly_monotone=" << (c.problem.strongly_monotone ? "true" : "false") << '\n';
  os << "mu_reg=" << num(c.problem.mu_reg) << '\n';
  os << "cap_box=" << num(c.problem.cap_box) << '\n';
  os << "network_file=" << c.problem.network_file << '\n';
  os << "toy_dim=" << c.problem.toy_dim << '\n';
  os << "toy_sigma_F=" << num(c.problem.toy_sigma_F) << '\n';
  os << "toy_sigma_H=" << num(c.problem.toy_sigma_H) << '\n';
  os << "policy=" << to_string(c.policy) << '\n';
  os << "k_sweep=";
  for (std::size_t i = 0; i < c.k_values.size(); ++i) os << (i ? "," : "") << c.k_values[i];
  os << '\n';
  os << "replications=" << c.replications << '\n';
  os << "seed=" << c.seed << '\n';
  os << "metric_cadence=";
  if (c.metric_cadence) {
    os << *c.metric_cadence;
  } else {
    os << "geometric";
  }
  os << '\n';
  os << "batch_size=" << (c.batch_size ? std::to_string(*c.batch_size) : "default") << '\n';
  os << "eta=" << (c.eta_override ? num(*c.eta_override) : "default") << '\n';
  os << "start=";
  if (c.start) {
    for (Eigen::Index i = 0; i < c.start->size(); ++i) os << (i ? "," : "") << num((*c.start)[i]);
  } else {
    os << "default";
  }
  os << '\n';
  os << "grid_step=" << num(c.grid_step) << '\n';
  os << "reference_tolerance=" << num(c.reference_tolerance) << '\n';
  os << "reference_eta=" << num(c.reference_eta) << '\n';
  os << "reference_max_iterations=" << c.reference_max_iterations << '\n';
  os << "workers=" << c.workers << '\n';
  os << "record_wall_time=" << (c.record_wall_time ? "true" : "false") << '\n';
  os << "output_dir=" << c.output_dir << '\n';
  for (const auto& [name, value] : c.constant_overrides) os << "const." << name << '=' << num(value) << '\n';
}

void apply_constant_overrides(ProblemConstants& c, const std::map<std::string, double>& overrides) {
  for (const auto& [name, v] : overrides) {
    if (name == "L_F") c.L_F = v;
    else if (name == "M_F") c.M_F = v;
    else if (name == "L_H") c.L_H = v;
    else if (name == "M_H") c.M_H = v;
    else if (name == "sigma_F") c.sigma_F = v;
    else if (name == "sigma_H") c.sigma_H = v;
    else if (name == "mu_H") c.mu_H = v;
    else if (name == "C_H") c.C_H = v;
    else if (name == "C_F") c.C_F = v;
    else if (name == "B_H") c.B_H = v;
    else if (name == "B_F") c.B_F = v;
    else if (name == "alpha") c.alpha = v;
    else if (name == "H_at_xstar_norm") c.H_at_xstar_norm = v;
    else throw ConfigError("unknown constant '" + name + "'");
  }
  c.validate();
}

}  // namespace ropex
