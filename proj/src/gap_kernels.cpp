#include "ropex/errors.hpp"
#include "ropex/metrics.hpp"

#include <cmath>
#include <limits>

#include <omp.h>

namespace ropex {

std::vector<Eigen::Index> grid_counts(const Box& box, double step) {
  if (!(step > 0.0)) throw ConfigError("grid step must be positive");
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(box.lower.size()));
  for (Eigen::Index i = 0; i < box.lower.size(); ++i) {
    const double width = box.upper[i] - box.lower[i];
    if (!std::isfinite(width)) throw ConfigError("grid needs a bounded box");
    counts[static_cast<std::size_t>(i)] =
        width == 0.0 ? 1 : static_cast<Eigen::Index>(std::ceil(width / step - 1e-9)) + 1;
  }
  return counts;
}

namespace {

double coordinate(const Box& box, Eigen::Index axis, Eigen::Index i, Eigen::Index count) {
  if (count == 1) return box.lower[axis];
  if (i == count - 1) return box.upper[axis];
  return box.lower[axis] + (box.upper[axis] - box.lower[axis]) * static_cast<double>(i) /
                               static_cast<double>(count - 1);
}

std::int64_t total_points(const std::vector<Eigen::Index>& counts) {
  std::int64_t total = 1;
  for (auto c : counts) {
    total *= c;
    if (total > kMaxGridPoints) throw ConfigError("grid too fine: more than 5e8 points");
  }
  return total;
}

void serial_rec(const GridObjective& f, const Box& box, const std::vector<Eigen::Index>& counts,
                Eigen::Index axis, Point& x, double& best) {
  if (axis == x.size()) {
    best = std::max(best, f(x));
    return;
  }
  const Eigen::Index n = counts[static_cast<std::size_t>(axis)];
  for (Eigen::Index i = 0; i < n; ++i) {
    x[axis] = coordinate(box, axis, i, n);
    serial_rec(f, box, counts, axis + 1, x, best);
  }
}

}  // namespace

double grid_max_serial(const GridObjective& f, const Box& box, double step) {
  const auto counts = grid_counts(box, step);
  total_points(counts);
  Point x(box.lower.size());
  double best = -std::numeric_limits<double>::infinity();
  serial_rec(f, box, counts, 0, x, best);
  return best;
}

double grid_max_parallel(const GridObjective& f, const Box& box, double step) {
  const auto counts = grid_counts(box, step);
  const std::int64_t total = total_points(counts);
  const Eigen::Index dim = box.lower.size();
  double best = -std::numeric_limits<double>::infinity();

#pragma omp parallel reduction(max : best)
  {
    Point x(dim);
#pragma omp for schedule(static)
    for (std::int64_t flat = 0; flat < total; ++flat) {
      // Last axis varies fastest, as in the nested loops.
      std::int64_t rem = flat;
      for (Eigen::Index axis = dim - 1; axis >= 0; --axis) {
        const Eigen::Index n = counts[static_cast<std::size_t>(axis)];
        x[axis] = coordinate(box, axis, rem % n, n);
        rem /= n;
      }
      best = std::max(best, f(x));
    }
  }
  return best;
}

}  // namespace ropex
