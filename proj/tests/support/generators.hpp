#pragma once

// Hand-rolled generators for the property tests.

#include "ropex/problems.hpp"

#include <cstdint>
#include <random>

namespace ropex::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng_);
  }

  Point in_box(const Box& b) {
    Point x(b.lower.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = uniform(b.lower[i], b.upper[i]);
    return x;
  }

  /// Spread well outside the box so projection is exercised.
  Point around_box(const Box& b) {
    Point x(b.lower.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double w = b.upper[i] - b.lower[i] + 1.0;
      x[i] = uniform(b.lower[i] - w, b.upper[i] + w);
    }
    return x;
  }

  Point gaussian(Eigen::Index n, double scale = 1.0) {
    Point x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = scale * normal();
    return x;
  }

  Box box(Eigen::Index n) {
    Box b{Point(n), Point(n)};
    for (Eigen::Index i = 0; i < n; ++i) {
      b.lower[i] = uniform(-5.0, 5.0);
      b.upper[i] = b.lower[i] + uniform(0.0, 4.0);
    }
    return b;
  }

  Matrix skew(Eigen::Index n) {
    const Matrix M = Matrix::NullaryExpr(n, n, [&] { return normal(); });
    return M - M.transpose();
  }

  /// Nonnegative constants with everything the policies might read.
  ProblemConstants constants(bool smooth_deterministic = false) {
    ProblemConstants c;
    c.L_F = uniform(0.1, 5.0);
    c.L_H = uniform(0.1, 5.0);
    c.M_F = smooth_deterministic ? 0.0 : uniform(0.0, 2.0);
    c.M_H = uniform(0.0, 2.0);
    c.sigma_F = smooth_deterministic ? 0.0 : uniform(0.0, 3.0);
    c.sigma_H = uniform(0.0, 3.0);
    c.mu_H = uniform(0.05, 2.0);
    c.C_H = uniform(0.5, 50.0);
    c.B_H = uniform(0.5, 50.0);
    c.alpha = uniform(0.1, 10.0);
    c.H_at_xstar_norm = uniform(0.1, 10.0);
    return c;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace ropex::testing
