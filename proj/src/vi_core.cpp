#include "ropex/vi_core.hpp"

#include "ropex/errors.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace ropex {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr std::uint64_t splitmix_finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t absorb(std::uint64_t h, std::uint64_t v) {
  return splitmix_finalize(h ^ splitmix_finalize(v + kGolden));
}

void check_dim(const FeasibleSet& set, const Point& y) {
  if (y.size() != set.dim()) {
    throw ConfigError("dimension mismatch: point has " + std::to_string(y.size()) +
                      " coordinates, set has " + std::to_string(set.dim()));
  }
}

}  // namespace

bool all_finite(const Point& x) { return x.allFinite(); }

FeasibleSet::FeasibleSet(Shape shape, std::optional<double> radius)
    : shape_(std::move(shape)), radius_(radius) {
  std::visit(overloaded{
                 [](const Box& b) {
                   if (b.lower.size() != b.upper.size()) {
                     throw ConfigError("box bounds have different dimensions");
                   }
                   if ((b.lower.array() > b.upper.array()).any()) {
                     throw ConfigError("box requires lower <= upper componentwise");
                   }
                 },
                 [](const NonnegativeOrthant& o) {
                   if (o.dim < 1) throw ConfigError("orthant dimension must be positive");
                 },
                 [](const CappedNonnegativeBox& c) {
                   if ((c.upper.array() < 0.0).any()) {
                     throw ConfigError("capped box requires nonnegative caps");
                   }
                 },
             },
             shape_);
  if (radius_ && !(*radius_ > 0.0)) throw ConfigError("radius must be positive");
}

FeasibleSet FeasibleSet::box(Point lower, Point upper) {
  return FeasibleSet(Box{std::move(lower), std::move(upper)});
}

FeasibleSet FeasibleSet::orthant(Eigen::Index dim, std::optional<double> radius) {
  return FeasibleSet(NonnegativeOrthant{dim}, radius);
}

FeasibleSet FeasibleSet::capped(Point upper) {
  return FeasibleSet(CappedNonnegativeBox{std::move(upper)});
}

Eigen::Index FeasibleSet::dim() const {
  return std::visit(overloaded{
                        [](const Box& b) { return b.lower.size(); },
                        [](const NonnegativeOrthant& o) { return o.dim; },
                        [](const CappedNonnegativeBox& c) { return c.upper.size(); },
                    },
                    shape_);
}

bool FeasibleSet::bounded() const { return !std::holds_alternative<NonnegativeOrthant>(shape_); }

Box FeasibleSet::bounds() const {
  return std::visit(
      overloaded{
          [](const Box& b) { return b; },
          [](const NonnegativeOrthant& o) {
            return Box{Point::Zero(o.dim),
                       Point::Constant(o.dim, std::numeric_limits<double>::infinity())};
          },
          [](const CappedNonnegativeBox& c) { return Box{Point::Zero(c.upper.size()), c.upper}; },
      },
      shape_);
}

double FeasibleSet::radius() const {
  if (bounded()) {
    const Box b = bounds();
    return 0.5 * (b.upper - b.lower).norm();
  }
  if (!radius_) {
    throw ConfigError("unbounded feasible set needs an explicit radius for step-size formulas");
  }
  return *radius_;
}

bool FeasibleSet::contains(const Point& x, double tol) const {
  if (x.size() != dim()) return false;
  const Box b = bounds();
  return (x.array() >= b.lower.array() - tol).all() && (x.array() <= b.upper.array() + tol).all();
}

Point FeasibleSet::center() const {
  if (!bounded()) return Point::Ones(dim());
  const Box b = bounds();
  return 0.5 * (b.lower + b.upper);
}

Point project(const FeasibleSet& set, const Point& y) {
  check_dim(set, y);
  return std::visit(overloaded{
                        [&](const Box& b) -> Point { return y.cwiseMax(b.lower).cwiseMin(b.upper); },
                        [&](const NonnegativeOrthant&) -> Point { return y.cwiseMax(0.0); },
                        [&](const CappedNonnegativeBox& c) -> Point {
                          return y.cwiseMax(0.0).cwiseMin(c.upper);
                        },
                    },
                    set.shape());
}

double distance(const FeasibleSet& set, const Point& y) { return (y - project(set, y)).norm(); }

void ProblemConstants::validate() const {
  const auto nonneg = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ConfigError(std::string("constant ") + name + " must be a finite nonnegative number");
    }
  };
  nonneg(L_F, "L_F");
  nonneg(M_F, "M_F");
  nonneg(L_H, "L_H");
  nonneg(M_H, "M_H");
  nonneg(sigma_F, "sigma_F");
  nonneg(sigma_H, "sigma_H");
  nonneg(mu_H, "mu_H");
  if (C_H) nonneg(*C_H, "C_H");
  if (C_F) nonneg(*C_F, "C_F");
  if (B_H) nonneg(*B_H, "B_H");
  if (B_F) nonneg(*B_F, "B_F");
  if (H_at_xstar_norm) nonneg(*H_at_xstar_norm, "H_at_xstar_norm");
  if (alpha && !(*alpha > 0.0)) throw ConfigError("constant alpha must be positive");
}

double ProblemConstants::require(const std::optional<double>& v, const char* name) {
  if (!v) throw ConfigError(std::string("missing required constant ") + name);
  return *v;
}

CounterEngine::CounterEngine(const SeededStream& stream, std::uint64_t slot) {
  std::uint64_t h = splitmix_finalize(stream.seed ^ 0x5eedULL);
  h = absorb(h, stream.replication);
  h = absorb(h, static_cast<std::uint64_t>(stream.op));
  h = absorb(h, stream.iteration);
  h = absorb(h, slot);
  state_ = h;
}

CounterEngine::result_type CounterEngine::operator()() {
  state_ += kGolden;
  return splitmix_finalize(state_);
}

StochasticOracle::StochasticOracle(MeanMap mean_map, NoiseModel noise, double variance_bound)
    : mean_map_(std::move(mean_map)), noise_(std::move(noise)), variance_bound_(variance_bound) {
  if (!mean_map_) throw ConfigError("oracle needs a mean map");
  if (!(variance_bound_ >= 0.0)) throw ConfigError("variance bound must be nonnegative");
  if (const auto* custom = std::get_if<CustomNoise>(&noise_); custom && !custom->draw) {
    throw ConfigError("custom noise model needs a sampler");
  }
}

StochasticOracle StochasticOracle::without_noise() const {
  return StochasticOracle(mean_map_, NoNoise{}, 0.0);
}

namespace {

Point gaussian_noise(const AdditiveGaussian& g, CounterEngine& eng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Point z(g.stddev.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = g.stddev[i] * normal(eng);
  return z;
}

}  // namespace

Point sample(const StochasticOracle& oracle, const Point& x, const SeededStream& stream) {
  return sample_batch(oracle, x, stream, 1);
}

Point sample_batch(const StochasticOracle& oracle, const Point& x, const SeededStream& stream,
                   std::uint64_t batch) {
  if (batch == 0) throw ConfigError("batch size must be at least 1");
  return std::visit(
      overloaded{
          [&](const NoNoise&) -> Point { return oracle.mean(x); },
          [&](const AdditiveGaussian& g) -> Point {
            const Point m = oracle.mean(x);
            if (g.stddev.size() != m.size()) {
              throw OracleError("gaussian noise dimension does not match the mean map");
            }
            Point avg = Point::Zero(m.size());
            for (std::uint64_t s = 0; s < batch; ++s) {
              CounterEngine eng(stream, s);
              avg += (gaussian_noise(g, eng) - avg) / static_cast<double>(s + 1);
            }
            return m + avg;
          },
          [&](const CustomNoise& c) -> Point {
            Point avg;
            for (std::uint64_t s = 0; s < batch; ++s) {
              CounterEngine eng(stream, s);
              Point draw = c.draw(x, eng);
              if (s == 0) {
                avg = Point::Zero(draw.size());
              }
              avg += (draw - avg) / static_cast<double>(s + 1);
            }
            return avg;
          },
      },
      oracle.noise());
}

}  // namespace ropex
