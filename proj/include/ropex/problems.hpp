#pragma once

// Benchmark instances: the Nash-constrained stochastic QP, the five-node
// traffic equilibrium problem and small skew-symmetric toys.

#include "ropex/vi_core.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

namespace ropex {

using ScalarMap = std::function<double(const Point&)>;

/// What is known about the solutions. Anything absent makes the matching
/// metric NA (or fall back to a numeric reference).
struct ProblemReferences {
  /// X_F* when it is an axis-aligned box (degenerate coordinates allowed).
  std::optional<Box> inner_solution_set;
  /// Numeric stand-in for X_F* when no analytic description exists.
  std::optional<Point> inner_reference;
  std::optional<double> inner_reference_residual;
  /// x*.
  std::optional<Point> outer_solution;
  /// ψ, the outer objective when H is a gradient; outer_gap = ψ(x̃) − ψ(x*).
  ScalarMap outer_objective;
  /// Closed-form max_{x∈X} <F(x), x̃ − x>.
  ScalarMap feasibility_gap;
  /// Closed-form max_{x∈X_F*} <H(x), x̃ − x>.
  ScalarMap optimality_gap;
  /// Problem-specific saddle surrogate (Nash only).
  ScalarMap saddle_gap;
  /// The inner problem is a complementarity problem on the orthant; φ applies.
  bool complementarity = false;
};

struct ProblemInstance {
  std::string id;
  FeasibleSet set = FeasibleSet::box(Point::Zero(1), Point::Ones(1));
  StochasticOracle inner;
  StochasticOracle outer;
  ProblemConstants constants;
  ProblemReferences refs;
  /// Default starting point (projected onto the set by the solver).
  Point start;
  /// Free-form notes echoed into experiment outputs.
  std::string notes;

  Eigen::Index dim() const { return set.dim(); }
};

// ---------------------------------------------------------------------------
// Nash-constrained QP
// ---------------------------------------------------------------------------

/// X = [20,50]×[5,15], F(x;ξ) = (−2x₂+ξ, 2x₁) with ξ∼N(10,1), H(x;ζ) = x+ζ.
ProblemInstance nash_problem(bool strongly_monotone);

/// f(x₁,x₂) = 25 − 2x₁x₂ + 10x₁, the expected saddle function.
double nash_saddle_function(double x1, double x2);

// ---------------------------------------------------------------------------
// Traffic equilibrium
// ---------------------------------------------------------------------------

struct TrafficNetwork {
  Matrix delta;  ///< link-path incidence, links × paths
  Matrix omega;  ///< O-D/path incidence, pairs × paths
  Point cap;
  Point t0;
  Point n;
  Point demand;
  /// Standard deviation of the per-pair demand noise.
  double demand_stddev = 1.0;

  Eigen::Index links() const { return delta.rows(); }
  Eigen::Index paths() const { return delta.cols(); }
  Eigen::Index pairs() const { return omega.rows(); }

  /// Throws ConfigError when a path has no link, a path is not served by
  /// exactly one pair, or cap/t0 are not positive.
  void validate() const;
};

/// The seven-link, six-path network with two O-D pairs.
TrafficNetwork builtin_network();

/// Text format, one directive per line, '#' starts a comment:
///   links L
///   path l1 l2 ...        (1-based link indices, one line per path)
///   od b1 b2 ...          (0/1 per path, one line per O-D pair)
///   cap c1 .. cL   |  cap c      (a single value is broadcast)
///   t0 ...  n ...  demand d1 .. dW  [demand_stddev s]
TrafficNetwork parse_network(std::istream& in);
TrafficNetwork load_network(const std::string& path);

/// t⁰(1 + 0.15 (f/cap)ⁿ) per link. Throws ConfigError for negative flow.
Point gbpr_cost(const TrafficNetwork& net, const Point& f);
/// d/df of gbpr_cost.
Point gbpr_derivative(const TrafficNetwork& net, const Point& f);
/// Δᵀ c(Δh).
Point path_cost(const TrafficNetwork& net, const Point& h);
/// Gradient of ζᵀC(h) in x = [h; u]: h-block Δᵀ diag(c′(Δh)) Δ ζ, u-block 0.
Point traffic_outer_mean(const TrafficNetwork& net, const Point& x, const Point& zeta);
/// Total travel cost 1ᵀC(h) = Σ_ℓ (Δ1)_ℓ c_ℓ(f_ℓ).
double total_travel_cost(const TrafficNetwork& net, const Point& x);
/// Deterministic F at mean demand.
Point traffic_inner_mean(const TrafficNetwork& net, const Point& x);

struct TrafficOptions {
  bool strongly_monotone = false;
  double mu_reg = 0.1;
  double cap_box = 1e4;
  std::optional<TrafficNetwork> network;
};

/// x = [h; u] on [0, cap_box]^(paths+pairs). Throws ConfigError for cap_box <= 0.
ProblemInstance traffic_problem(const TrafficOptions& options = {});

// ---------------------------------------------------------------------------
// Toys
// ---------------------------------------------------------------------------

struct SkewToyOptions {
  /// F(x) = A x + b on [0,1]ⁿ. A must be skew-symmetric.
  Matrix A;
  Point b;
  /// H(x) = x − target.
  Point target;
  double sigma_F = 0.0;
  double sigma_H = 0.0;
  /// Analytic X_F* and x*, when the caller knows them.
  std::optional<Box> inner_solution_set;
  std::optional<Point> outer_solution;
  std::optional<double> alpha;
};

ProblemInstance skew_toy(const SkewToyOptions& options);

/// n even: A is block-diagonal rotations, F(x) = A(x − c) with c the box
/// center, so X_F* = {c} and x* = c. Noise is Gaussian with the given
/// per-sample standard deviation norms.
ProblemInstance centered_skew_toy(Eigen::Index n, double sigma_F = 0.0, double sigma_H = 0.0);

/// Two-dimensional weakly sharp toy: F(x) = (x₂ + 1, −x₁), H(x) = x − (0.5, 0.3).
/// X_F* = {0}×[0,1], α = 1, x* = (0, 0.3).
ProblemInstance sharp_skew_toy();

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

struct ProblemOptions {
  std::string id = "nash";
  bool strongly_monotone = false;
  double mu_reg = 0.1;
  double cap_box = 1e4;
  std::string network_file;
  Eigen::Index toy_dim = 2;
  double toy_sigma_F = 0.0;
  double toy_sigma_H = 0.0;
};

/// Ids: nash, traffic, skew-toy, skew-toy-sharp. The suffix "-strong" on
/// nash/traffic sets strongly_monotone. Throws ConfigError for unknown ids.
ProblemInstance make_problem(const ProblemOptions& options);

// ---------------------------------------------------------------------------
// Closed forms shared by the instances
// ---------------------------------------------------------------------------

/// max_{x∈box} <A x + b, x̃ − x> for skew-symmetric A:
/// bᵀx̃ + Σ_i max(l_i v_i, u_i v_i) with v = Aᵀx̃ − b.
double affine_skew_gap(const Matrix& A, const Point& b, const Box& box, const Point& xt);

/// max_{x∈S} <x − a, x̃ − x> over a box S, separable and concave.
double shifted_identity_gap(const Point& a, const Box& S, const Point& xt);

}  // namespace ropex
