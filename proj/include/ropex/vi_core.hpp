#pragma once

// Points, feasible sets with exact Euclidean projection, problem constants and
// seeded stochastic oracles.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <variant>

namespace ropex {

using Point = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

bool all_finite(const Point& x);

// ---------------------------------------------------------------------------
// Feasible sets
// ---------------------------------------------------------------------------

/// Axis-aligned box [lower, upper]. Degenerate coordinates (lower == upper)
/// are allowed, which lets the same type describe faces and segments.
struct Box {
  Point lower;
  Point upper;
};

struct NonnegativeOrthant {
  Eigen::Index dim = 0;
};

/// [0, upper] componentwise.
struct CappedNonnegativeBox {
  Point upper;
};

class FeasibleSet {
 public:
  using Shape = std::variant<Box, NonnegativeOrthant, CappedNonnegativeBox>;

  /// Throws ConfigError if a box has lower > upper or a cap is negative.
  explicit FeasibleSet(Shape shape, std::optional<double> radius = std::nullopt);

  static FeasibleSet box(Point lower, Point upper);
  static FeasibleSet orthant(Eigen::Index dim, std::optional<double> radius = std::nullopt);
  static FeasibleSet capped(Point upper);

  const Shape& shape() const { return shape_; }
  Eigen::Index dim() const;
  bool bounded() const;

  /// D_X surrogate: half the Euclidean diameter for bounded shapes, the
  /// user-supplied radius otherwise. Throws ConfigError when neither exists.
  double radius() const;

  /// Bounding box of the set; lower/upper may be +-infinity for the orthant.
  Box bounds() const;

  bool contains(const Point& x, double tol = 0.0) const;

  /// Midpoint for bounded sets, the all-ones point for the orthant.
  Point center() const;

 private:
  Shape shape_;
  std::optional<double> radius_;
};

/// Euclidean projection. Throws ConfigError on dimension mismatch.
Point project(const FeasibleSet& set, const Point& y);

/// dist(y, set) = ||y - project(set, y)||.
double distance(const FeasibleSet& set, const Point& y);

// ---------------------------------------------------------------------------
// Problem constants
// ---------------------------------------------------------------------------

struct ProblemConstants {
  double L_F = 0.0;
  double M_F = 0.0;
  double L_H = 0.0;
  double M_H = 0.0;
  double sigma_F = 0.0;
  double sigma_H = 0.0;
  double mu_H = 0.0;
  std::optional<double> C_H;
  std::optional<double> C_F;
  std::optional<double> B_H;
  std::optional<double> B_F;
  std::optional<double> alpha;
  std::optional<double> H_at_xstar_norm;

  /// Throws ConfigError on negative entries or a nonpositive alpha.
  void validate() const;

  /// Value of an optional field or a ConfigError naming it.
  static double require(const std::optional<double>& v, const char* name);
};

// ---------------------------------------------------------------------------
// Seeded streams
// ---------------------------------------------------------------------------

enum class OperatorTag : std::uint32_t { Inner = 1, Outer = 2 };

/// Identity of one scenario draw. A sample is a pure function of
/// (seed, replication, op, iteration, slot).
struct SeededStream {
  std::uint64_t seed = 0;
  std::uint64_t replication = 0;
  OperatorTag op = OperatorTag::Inner;
  std::uint64_t iteration = 1;

  SeededStream at(std::uint64_t k) const {
    SeededStream s = *this;
    s.iteration = k;
    return s;
  }
  SeededStream for_operator(OperatorTag tag) const {
    SeededStream s = *this;
    s.op = tag;
    return s;
  }
};

/// Counter-based bit generator: the key is hashed once, then a splitmix64
/// sequence supplies the draws for a single sample. Satisfies
/// UniformRandomBitGenerator so the standard distributions apply.
class CounterEngine {
 public:
  using result_type = std::uint64_t;

  CounterEngine(const SeededStream& stream, std::uint64_t slot);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()();

 private:
  std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// Stochastic oracles
// ---------------------------------------------------------------------------

using MeanMap = std::function<Point(const Point&)>;

struct NoNoise {};

/// Independent zero-mean normal noise with per-coordinate standard deviation.
struct AdditiveGaussian {
  Point stddev;
};

/// Scenario-indexed sampler returning a full sample 𝔉(x, ξ) for the scenario
/// drawn from the engine.
struct CustomNoise {
  std::function<Point(const Point&, CounterEngine&)> draw;
};

using NoiseModel = std::variant<NoNoise, AdditiveGaussian, CustomNoise>;

class StochasticOracle {
 public:
  StochasticOracle() = default;
  StochasticOracle(MeanMap mean_map, NoiseModel noise, double variance_bound);

  Point mean(const Point& x) const { return mean_map_(x); }
  const NoiseModel& noise() const { return noise_; }
  /// σ² bound on E||sample - mean||².
  double variance_bound() const { return variance_bound_; }
  bool deterministic() const { return std::holds_alternative<NoNoise>(noise_); }

  /// Same mean map with the noise switched off.
  StochasticOracle without_noise() const;

 private:
  MeanMap mean_map_;
  NoiseModel noise_ = NoNoise{};
  double variance_bound_ = 0.0;
};

/// One draw at the stream's current iteration (batch slot 0).
Point sample(const StochasticOracle& oracle, const Point& x, const SeededStream& stream);

/// Streaming mean of `batch` draws from slots 0..batch-1. batch == 1 is
/// bitwise identical to sample(). Throws ConfigError for batch == 0.
Point sample_batch(const StochasticOracle& oracle, const Point& x, const SeededStream& stream,
                   std::uint64_t batch);

}  // namespace ropex
