#include "ropex/errors.hpp"
#include "ropex/problems.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace ropex {

namespace {

constexpr double kGbprFactor = 0.15;

std::vector<double> read_numbers(std::istringstream& ss, const std::string& what) {
  std::vector<double> out;
  std::string tok;
  while (ss >> tok) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("network file: bad number '" + tok + "' in " + what + " line");
    }
  }
  if (out.empty()) throw ConfigError("network file: empty " + what + " line");
  return out;
}

Point per_link(const std::vector<double>& v, Eigen::Index L, const std::string& what) {
  if (v.size() == 1) return Point::Constant(L, v[0]);
  if (static_cast<Eigen::Index>(v.size()) != L) {
    throw ConfigError("network file: " + what + " needs 1 or " + std::to_string(L) + " values");
  }
  return Eigen::Map<const Point>(v.data(), L);
}

void require_nonnegative(const Point& v, const char* what) {
  if ((v.array() < 0.0).any()) throw ConfigError(std::string(what) + " must be nonnegative");
}

}  // namespace

void TrafficNetwork::validate() const {
  const Eigen::Index L = links(), P = paths();
  if (L < 1 || P < 1) throw ConfigError("network needs at least one link and one path");
  for (Eigen::Index p = 0; p < P; ++p) {
    if (delta.col(p).sum() < 1.0) {
      throw ConfigError("path " + std::to_string(p + 1) + " uses no link");
    }
  }
  if (omega.cols() != P) throw ConfigError("O-D incidence has the wrong number of paths");
  for (Eigen::Index p = 0; p < P; ++p) {
    if (omega.col(p).sum() != 1.0) {
      throw ConfigError("path " + std::to_string(p + 1) + " must belong to exactly one O-D pair");
    }
  }
  if (cap.size() != L || t0.size() != L || n.size() != L) {
    throw ConfigError("cap, t0 and n need one value per link");
  }
  if ((cap.array() <= 0.0).any() || (t0.array() <= 0.0).any()) {
    throw ConfigError("cap and t0 must be strictly positive");
  }
  if ((n.array() < 1.0).any()) throw ConfigError("GBPR exponents must be >= 1");
  if (demand.size() != pairs()) throw ConfigError("demand needs one value per O-D pair");
  if (!(demand_stddev >= 0.0)) throw ConfigError("demand noise must be nonnegative");
}

TrafficNetwork builtin_network() {
  const std::vector<std::vector<int>> paths = {{3, 7, 6}, {3, 1}, {4, 6}, {3, 7, 2}, {3, 5}, {4, 2}};
  TrafficNetwork net;
  net.delta = Matrix::Zero(7, 6);
  for (std::size_t p = 0; p < paths.size(); ++p) {
    for (int l : paths[p]) net.delta(l - 1, static_cast<Eigen::Index>(p)) = 1.0;
  }
  net.omega = Matrix::Zero(2, 6);
  net.omega.row(0).head(3).setOnes();
  net.omega.row(1).tail(3).setOnes();
  net.cap = Point::Constant(7, 400.0);
  net.t0 = Point::Ones(7);
  net.n = Point::Ones(7);
  net.demand = Point(2);
  net.demand << 200.0, 220.0;
  net.demand_stddev = 1.0;
  return net;
}

TrafficNetwork parse_network(std::istream& in) {
  Eigen::Index L = 0;
  std::vector<std::vector<int>> paths;
  std::vector<std::vector<double>> od;
  std::vector<double> cap, t0, n, demand;
  std::optional<double> demand_stddev;

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    std::string key;
    if (!(ss >> key)) continue;
    if (key == "links") {
      if (!(ss >> L) || L < 1) throw ConfigError("network file: bad links count on line " + std::to_string(lineno));
    } else if (key == "path") {
      std::vector<int> links;
      for (double v : read_numbers(ss, "path")) {
        if (v != std::floor(v) || v < 1) throw ConfigError("network file: link indices are 1-based integers");
        links.push_back(static_cast<int>(v));
      }
      paths.push_back(std::move(links));
    } else if (key == "od") {
      od.push_back(read_numbers(ss, "od"));
    } else if (key == "cap") {
      cap = read_numbers(ss, "cap");
    } else if (key == "t0") {
      t0 = read_numbers(ss, "t0");
    } else if (key == "n") {
      n = read_numbers(ss, "n");
    } else if (key == "demand") {
      demand = read_numbers(ss, "demand");
    } else if (key == "demand_stddev") {
      demand_stddev = read_numbers(ss, "demand_stddev").at(0);
    } else {
      throw ConfigError("network file: unknown directive '" + key + "' on line " + std::to_string(lineno));
    }
  }
  if (L < 1) throw ConfigError("network file: missing 'links' line");
  if (paths.empty() || od.empty()) throw ConfigError("network file: needs path and od lines");
  if (cap.empty() || t0.empty() || n.empty() || demand.empty()) {
    throw ConfigError("network file: cap, t0, n and demand are required");
  }

  const auto P = static_cast<Eigen::Index>(paths.size());
  TrafficNetwork net;
  net.delta = Matrix::Zero(L, P);
  for (Eigen::Index p = 0; p < P; ++p) {
    for (int l : paths[static_cast<std::size_t>(p)]) {
      if (l > L) throw ConfigError("network file: link index " + std::to_string(l) + " out of range");
      net.delta(l - 1, p) = 1.0;
    }
  }
  net.omega = Matrix::Zero(static_cast<Eigen::Index>(od.size()), P);
  for (std::size_t w = 0; w < od.size(); ++w) {
    if (static_cast<Eigen::Index>(od[w].size()) != P) {
      throw ConfigError("network file: od rows need one entry per path");
    }
    for (Eigen::Index p = 0; p < P; ++p) net.omega(static_cast<Eigen::Index>(w), p) = od[w][static_cast<std::size_t>(p)];
  }
  net.cap = per_link(cap, L, "cap");
  net.t0 = per_link(t0, L, "t0");
  net.n = per_link(n, L, "n");
  net.demand = Eigen::Map<const Point>(demand.data(), static_cast<Eigen::Index>(demand.size()));
  if (demand_stddev) net.demand_stddev = *demand_stddev;
  net.validate();
  return net;
}

TrafficNetwork load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open network file " + path);
  return parse_network(in);
}

Point gbpr_cost(const TrafficNetwork& net, const Point& f) {
  require_nonnegative(f, "link flow");
  Point c(f.size());
  for (Eigen::Index l = 0; l < f.size(); ++l) {
    c[l] = net.t0[l] * (1.0 + kGbprFactor * std::pow(f[l] / net.cap[l], net.n[l]));
  }
  return c;
}

Point gbpr_derivative(const TrafficNetwork& net, const Point& f) {
  require_nonnegative(f, "link flow");
  Point d(f.size());
  for (Eigen::Index l = 0; l < f.size(); ++l) {
    const double n = net.n[l];
    d[l] = net.t0[l] * kGbprFactor * n * std::pow(f[l] / net.cap[l], n - 1.0) / net.cap[l];
  }
  return d;
}

Point path_cost(const TrafficNetwork& net, const Point& h) {
  require_nonnegative(h, "path flow");
  return net.delta.transpose() * gbpr_cost(net, net.delta * h);
}

Point traffic_outer_mean(const TrafficNetwork& net, const Point& x, const Point& zeta) {
  const Point h = x.head(net.paths());
  const Point d = gbpr_derivative(net, net.delta * h);
  Point out = Point::Zero(x.size());
  out.head(net.paths()) = net.delta.transpose() * (d.asDiagonal() * (net.delta * zeta));
  return out;
}

double total_travel_cost(const TrafficNetwork& net, const Point& x) {
  const Point h = x.head(net.paths());
  const Point f = net.delta * h;
  return (net.delta * Point::Ones(net.paths())).dot(gbpr_cost(net, f));
}

Point traffic_inner_mean(const TrafficNetwork& net, const Point& x) {
  const Eigen::Index P = net.paths(), W = net.pairs();
  const Point h = x.head(P);
  const Point u = x.tail(W);
  Point out(P + W);
  out.head(P) = path_cost(net, h) - net.omega.transpose() * u;
  out.tail(W) = net.omega * h - net.demand;
  return out;
}

ProblemInstance traffic_problem(const TrafficOptions& o) {
  if (!(o.cap_box > 0.0)) throw ConfigError("cap_box must be positive");
  if (o.strongly_monotone && !(o.mu_reg > 0.0)) throw ConfigError("mu_reg must be positive");
  const TrafficNetwork net = o.network ? *o.network : builtin_network();
  net.validate();
  const Eigen::Index P = net.paths(), W = net.pairs(), dim = P + W;
  const double mu = o.strongly_monotone ? o.mu_reg : 0.0;

  ProblemInstance p;
  p.id = o.strongly_monotone ? "traffic-strong" : "traffic";
  p.set = FeasibleSet::capped(Point::Constant(dim, o.cap_box));

  Point f_stddev = Point::Zero(dim);
  f_stddev.tail(W).setConstant(net.demand_stddev);
  p.inner = StochasticOracle([net](const Point& x) { return traffic_inner_mean(net, x); },
                             AdditiveGaussian{f_stddev},
                             static_cast<double>(W) * net.demand_stddev * net.demand_stddev);

  const Point ones = Point::Ones(P);
  const auto outer_mean = [net, mu, ones](const Point& x) -> Point {
    return traffic_outer_mean(net, x, ones) + mu * x;
  };
  const auto outer_draw = [net, mu, P](const Point& x, CounterEngine& eng) -> Point {
    std::uniform_real_distribution<double> unif(0.0, 2.0);
    Point zeta(P);
    for (Eigen::Index i = 0; i < P; ++i) zeta[i] = unif(eng);
    return traffic_outer_mean(net, x, zeta) + mu * x;
  };

  // Worst-case slopes over the capped box: the largest link flow is cap_box
  // times the number of paths through the link, and c′ grows with flow.
  const Point f_max = o.cap_box * (net.delta * Point::Ones(P));
  const Point d_max = gbpr_derivative(net, f_max);
  const Matrix M_max = net.delta.transpose() * d_max.asDiagonal() * net.delta;
  const double delta_norm = net.delta.operatorNorm();
  const double omega_norm = net.omega.operatorNorm();
  const bool linear_costs = (net.n.array() == 1.0).all();

  ProblemConstants& c = p.constants;
  c.L_F = d_max.maxCoeff() * delta_norm * delta_norm + omega_norm;
  if (linear_costs) {
    c.L_H = mu;
  } else {
    if ((net.n.array() < 2.0 && net.n.array() != 1.0).any()) {
      throw ConfigError("outer Lipschitz constant needs GBPR exponents equal to 1 or >= 2");
    }
    double c2 = 0.0;
    for (Eigen::Index l = 0; l < net.links(); ++l) {
      const double n = net.n[l];
      if (n == 1.0) continue;
      const double second = net.t0[l] * kGbprFactor * n * (n - 1.0) *
                            std::pow(f_max[l] / net.cap[l], n - 2.0) / (net.cap[l] * net.cap[l]);
      c2 = std::max(c2, second * net.delta.row(l).sum());
    }
    c.L_H = c2 * delta_norm * delta_norm + mu;
  }
  c.sigma_F = std::sqrt(static_cast<double>(W)) * net.demand_stddev;
  // Var U(0,2) = 1/3 per coordinate.
  c.sigma_H = std::sqrt(M_max.squaredNorm() / 3.0);
  c.mu_H = mu;
  const double box_norm = o.cap_box * std::sqrt(static_cast<double>(dim));
  c.C_H = (M_max * ones).norm() + mu * box_norm;
  c.C_F = (net.delta.transpose() * gbpr_cost(net, f_max)).norm() +
          omega_norm * o.cap_box * (std::sqrt(static_cast<double>(W)) + std::sqrt(static_cast<double>(P))) +
          net.demand.norm();

  p.outer = StochasticOracle(outer_mean, CustomNoise{outer_draw}, c.sigma_H * c.sigma_H);

  p.refs.complementarity = true;
  p.refs.outer_objective = [net, mu](const Point& x) {
    return total_travel_cost(net, x) + 0.5 * mu * x.squaredNorm();
  };
  p.start = Point::Ones(dim);
  p.notes = "cap_box=" + std::to_string(o.cap_box) +
            (o.strongly_monotone ? "; strongly monotone stand-in H + mu_reg*x, mu_reg=" + std::to_string(o.mu_reg)
                                 : std::string());
  return p;
}

}  // namespace ropex
