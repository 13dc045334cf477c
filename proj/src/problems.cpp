#include "ropex/problems.hpp"

#include "ropex/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ropex {

namespace {

Point vec2(double a, double b) {
  Point p(2);
  p << a, b;
  return p;
}

}  // namespace

double affine_skew_gap(const Matrix& A, const Point& b, const Box& box, const Point& xt) {
  // <Ax + b, x̃ − x> = <Ax, x̃> + bᵀx̃ − bᵀx since xᵀAx = 0, linear in x.
  const Point v = A.transpose() * xt - b;
  double gap = b.dot(xt);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    gap += std::max(box.lower[i] * v[i], box.upper[i] * v[i]);
  }
  return gap;
}

double shifted_identity_gap(const Point& a, const Box& S, const Point& xt) {
  double gap = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double x = std::clamp(0.5 * (a[i] + xt[i]), S.lower[i], S.upper[i]);
    gap += (x - a[i]) * (xt[i] - x);
  }
  return gap;
}

double nash_saddle_function(double x1, double x2) { return 25.0 - 2.0 * x1 * x2 + 10.0 * x1; }

ProblemInstance nash_problem(bool strongly_monotone) {
  Matrix A(2, 2);
  A << 0.0, -2.0, 2.0, 0.0;
  const Point b = vec2(10.0, 0.0);

  ProblemInstance p;
  p.id = strongly_monotone ? "nash-strong" : "nash";
  p.set = FeasibleSet::box(vec2(20.0, 5.0), vec2(50.0, 15.0));
  p.inner = StochasticOracle([A, b](const Point& x) -> Point { return A * x + b; },
                             AdditiveGaussian{vec2(1.0, 0.0)}, 1.0);
  p.outer = StochasticOracle([](const Point& x) -> Point { return x; },
                             AdditiveGaussian{vec2(1.0, 1.0)}, 2.0);

  ProblemConstants& c = p.constants;
  c.L_F = 2.0;
  c.L_H = 1.0;
  c.sigma_F = 1.0;
  c.sigma_H = std::sqrt(2.0);
  c.mu_H = strongly_monotone ? 1.0 : 0.0;
  c.C_F = std::sqrt(10400.0);  // ‖(−20, 100)‖ at (50, 15)
  c.C_H = std::sqrt(2725.0);   // ‖(50, 15)‖
  c.B_F = 100.0;               // on X_F*: F = (0, 2x₁)
  c.B_H = std::sqrt(2525.0);   // ‖(50, 5)‖
  c.alpha = 40.0;
  c.H_at_xstar_norm = std::sqrt(425.0);

  const Box solution_set{vec2(20.0, 5.0), vec2(50.0, 5.0)};
  const Box X = p.set.bounds();
  p.refs.inner_solution_set = solution_set;
  p.refs.outer_solution = vec2(20.0, 5.0);
  p.refs.outer_objective = [](const Point& x) { return 0.5 * x.squaredNorm(); };
  p.refs.feasibility_gap = [A, b, X](const Point& x) { return affine_skew_gap(A, b, X, x); };
  p.refs.optimality_gap = [solution_set](const Point& x) {
    return shifted_identity_gap(Point::Zero(2), solution_set, x);
  };
  p.refs.saddle_gap = [](const Point& x) {
    return nash_saddle_function(x[0], 5.0) - nash_saddle_function(20.0, x[1]);
  };
  p.start = p.set.center();
  p.notes = strongly_monotone ? "mu_H=1 declared for H(x)=x+zeta" : "";
  return p;
}

ProblemInstance skew_toy(const SkewToyOptions& o) {
  const Eigen::Index n = o.A.rows();
  if (n < 1 || o.A.cols() != n) throw ConfigError("skew toy needs a square matrix A");
  if (!(o.A + o.A.transpose()).isZero(0.0)) throw ConfigError("skew toy matrix must be skew-symmetric");
  const Point b = o.b.size() == 0 ? Point::Zero(n) : o.b;
  if (b.size() != n || o.target.size() != n) throw ConfigError("skew toy vector dimensions differ");
  if (!(o.sigma_F >= 0.0) || !(o.sigma_H >= 0.0)) throw ConfigError("noise levels must be nonnegative");

  const auto noise = [n](double sigma) -> NoiseModel {
    if (sigma == 0.0) return NoNoise{};
    return AdditiveGaussian{Point::Constant(n, sigma / std::sqrt(static_cast<double>(n)))};
  };

  ProblemInstance p;
  p.id = "skew-toy";
  p.set = FeasibleSet::box(Point::Zero(n), Point::Ones(n));
  const Matrix A = o.A;
  const Point target = o.target;
  p.inner = StochasticOracle([A, b](const Point& x) -> Point { return A * x + b; },
                             noise(o.sigma_F), o.sigma_F * o.sigma_F);
  p.outer = StochasticOracle([target](const Point& x) -> Point { return x - target; },
                             noise(o.sigma_H), o.sigma_H * o.sigma_H);

  // Corner of the unit box farthest from a point.
  const auto farthest = [n](const Point& a) {
    Point v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = std::max(std::abs(a[i]), std::abs(1.0 - a[i]));
    return v.norm();
  };

  ProblemConstants& c = p.constants;
  c.L_F = A.operatorNorm();
  c.L_H = 1.0;
  c.sigma_F = o.sigma_F;
  c.sigma_H = o.sigma_H;
  c.mu_H = 1.0;
  c.C_H = farthest(target);
  {
    // ‖Ax + b‖ is convex, so its maximum over the box sits at a vertex.
    double cf = 0.0;
    if (n <= 16) {
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        Point v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = (mask >> i) & 1U ? 1.0 : 0.0;
        cf = std::max(cf, (A * v + b).norm());
      }
    } else {
      cf = c.L_F * std::sqrt(static_cast<double>(n)) + b.norm();
    }
    c.C_F = cf;
  }
  c.alpha = o.alpha;

  const Box X = p.set.bounds();
  p.refs.feasibility_gap = [A, b, X](const Point& x) { return affine_skew_gap(A, b, X, x); };
  p.refs.outer_objective = [target](const Point& x) { return 0.5 * (x - target).squaredNorm(); };
  if (o.inner_solution_set) {
    const Box S = *o.inner_solution_set;
    p.refs.inner_solution_set = S;
    p.refs.optimality_gap = [target, S](const Point& x) { return shifted_identity_gap(target, S, x); };
    // sup ‖H‖ over X_F*, attained at a vertex of S.
    Point v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      v[i] = std::max(std::abs(S.lower[i] - target[i]), std::abs(S.upper[i] - target[i]));
    }
    c.B_H = v.norm();
  }
  if (o.outer_solution) {
    p.refs.outer_solution = *o.outer_solution;
    c.H_at_xstar_norm = (*o.outer_solution - target).norm();
  }
  p.start = p.set.center();
  return p;
}

ProblemInstance centered_skew_toy(Eigen::Index n, double sigma_F, double sigma_H) {
  if (n < 2 || n % 2 != 0) throw ConfigError("centered skew toy needs an even dimension >= 2");
  Matrix A = Matrix::Zero(n, n);
  Point target(n);
  for (Eigen::Index i = 0; i < n; i += 2) {
    A(i, i + 1) = 1.0;
    A(i + 1, i) = -1.0;
    target[i] = 0.8;
    target[i + 1] = 0.2;
  }
  const Point center = Point::Constant(n, 0.5);
  SkewToyOptions o;
  o.A = A;
  o.b = -A * center;
  o.target = target;
  o.sigma_F = sigma_F;
  o.sigma_H = sigma_H;
  o.inner_solution_set = Box{center, center};
  o.outer_solution = center;
  ProblemInstance p = skew_toy(o);
  p.id = "skew-toy";
  // The start must differ from the solution or every gap is identically 0.
  p.start = Point::Zero(n);
  return p;
}

ProblemInstance sharp_skew_toy() {
  SkewToyOptions o;
  o.A = Matrix(2, 2);
  o.A << 0.0, 1.0, -1.0, 0.0;
  o.b = vec2(1.0, 0.0);
  o.target = vec2(0.5, 0.3);
  o.inner_solution_set = Box{vec2(0.0, 0.0), vec2(0.0, 1.0)};
  o.outer_solution = vec2(0.0, 0.3);
  o.alpha = 1.0;
  ProblemInstance p = skew_toy(o);
  p.id = "skew-toy-sharp";
  p.start = vec2(1.0, 1.0);
  return p;
}

ProblemInstance make_problem(const ProblemOptions& o) {
  std::string id = o.id;
  bool strong = o.strongly_monotone;
  constexpr std::string_view suffix = "-strong";
  if (id.size() > suffix.size() && id.compare(id.size() - suffix.size(), suffix.size(), suffix) == 0) {
    strong = true;
    id.resize(id.size() - suffix.size());
  }
  if (id == "nash") return nash_problem(strong);
  if (id == "traffic") {
    TrafficOptions t;
    t.strongly_monotone = strong;
    t.mu_reg = o.mu_reg;
    t.cap_box = o.cap_box;
    if (!o.network_file.empty()) t.network = load_network(o.network_file);
    return traffic_problem(t);
  }
  if (strong) throw ConfigError("problem '" + o.id + "' has no strongly monotone variant");
  if (id == "skew-toy") return centered_skew_toy(o.toy_dim, o.toy_sigma_F, o.toy_sigma_H);
  if (id == "skew-toy-sharp") return sharp_skew_toy();
  throw ConfigError("unknown problem id '" + o.id + "' (expected nash, traffic, skew-toy, skew-toy-sharp)");
}

}  // namespace ropex
