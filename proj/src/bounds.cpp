// Closed-form bound expressions, transcribed term by term. Asymmetries between
// the bounds (a D_X present in one denominator and absent in a sibling, σ_H²
// versus 2σ_H² under a square root) are kept as printed.

#include "ropex/errors.hpp"
#include "ropex/schedules.hpp"

#include <cmath>

namespace ropex {

namespace {

/// a / b with 0 / 0 read as 0: a term whose numerator vanishes contributes nothing.
double frac(double num, double den) {
  if (num == 0.0) return 0.0;
  return num / den;
}

double p(double K, double e) { return std::pow(K, e); }

struct Terms {
  double LF, LH, MF, MH, sF, sH;
  double D;
  double K;
  double eta;

  double Leta() const { return LF + eta * LH; }
  /// M_F² + 2σ_F² + η²(M_H² + 2σ_H²)
  double S2() const { return MF * MF + 2 * sF * sF + eta * eta * (MH * MH + 2 * sH * sH); }
  /// M_F² + 2σ_F² + η²(M_H² + σ_H²)
  double S2h() const { return MF * MF + 2 * sF * sF + eta * eta * (MH * MH + sH * sH); }
  double S() const { return std::sqrt(S2()); }
  /// σ_F² + η²σ_H²
  double N() const { return sF * sF + eta * eta * sH * sH; }
};

Terms make_terms(const ProblemConstants& c, double D, std::int64_t K, double eta) {
  return Terms{c.L_F, c.L_H, c.M_F, c.M_H, c.sigma_F, c.sigma_H, D, static_cast<double>(K), eta};
}

// --- fixed nonsmooth policy, monotone -------------------------------------

double monotone_optimality(const Terms& t) {
  const double K = t.K, D = t.D;
  return D * (16 * D * (t.LF / p(K, 0.75) + t.LH / K) + 2 * t.S() / p(K, 0.25) +
              frac(5 * t.S2() + t.N(), 8 * D * p(K, -0.25) * t.Leta() + p(K, 0.25) * t.S()) +
              frac(5 * t.S2(), 8 * D * p(K, 0.75) * t.Leta() + p(K, 1.25) * std::sqrt(t.S2h())));
}

double monotone_feasibility_bracket(const Terms& t, double C_H) {
  const double K = t.K, D = t.D;
  return 16 * D * (t.LF / K + t.LH / p(K, 1.25)) + 2 * t.S() / p(K, 0.5) +
         frac(5 * t.S2() + t.N(), 8 * D * t.Leta() + p(K, 0.5) * t.S()) +
         frac(5 * t.S2h(), 8 * D * K * t.Leta() + p(K, 1.5) * t.S()) + 2 * C_H / p(K, 0.25);
}

// --- fixed nonsmooth policy, weakly sharp -----------------------------------

double weak_optimality(const Terms& t, double Hstar, double alpha) {
  const double K = t.K, D = t.D;
  return Hstar * D / alpha *
         (16 * D * (t.LF / K + t.LH / p(K, 1.25)) + 2 * t.S() / p(K, 0.5) +
          frac(2 * (5 * t.S2() + t.N()), 8 * D * t.Leta() + p(K, 0.5) * t.S()) +
          frac(10 * t.S2(), 8 * K * D * t.Leta() + p(K, 1.5) * t.S()));
}

double weak_distance(const Terms& t, double alpha) {
  const double K = t.K, D = t.D;
  return D / alpha *
         (32 * D * (t.LF / K + t.LH / p(K, 1.25)) + 4 * t.S() / p(K, 0.5) +
          frac(10 * t.S2() + 2 * t.N(), 8 * D * t.Leta() + p(K, 0.5) * t.S()) +
          frac(10 * t.S2(), 8 * K * D * t.Leta() + p(K, 1.5) * t.S()));
}

// --- increasing weights, strongly monotone outer operator -----------------

double strong_optimality(const Terms& t) {
  const double K = t.K, D = t.D;
  return D * ((16 * D * (t.LF / p(K, 1.75) + t.LH / (K * K)) + 2 * t.S() / p(K, 1.25)) +
              frac(5 * t.S2() + t.N(), 8 * p(K, 0.75) * D * t.Leta() + p(K, 1.25) * t.S()) +
              frac(5 * t.S2(), 8 * p(K, 1.75) * D * t.Leta() + p(K, 2.25) * std::sqrt(t.S2h())));
}

double strong_feasibility(const Terms& t, double C_H) {
  const double K = t.K, D = t.D;
  return D * ((16 * D * (t.LF / (K * K) + t.LH / p(K, 2.25)) + 2 * t.S() / p(K, 1.5)) +
              frac(5 * t.S2() + t.N(), 8 * K * t.Leta() + p(K, 1.5) * t.S()) +
              frac(5 * t.S2h(), 8 * K * K * t.Leta() + p(K, 2.5) * t.S()) + 2 * C_H / p(K, 1.25));
}

double strong_lower_bracket(const Terms& t, double C_H) {
  const double K = t.K, D = t.D;
  return D * ((16 * D * (t.LF / (K * K) + t.LH / p(K, 2.25)) + 2 * t.S() / p(K, 1.5)) +
              frac(5 * t.S2() + t.N(), 8 * K * D * t.Leta() + p(K, 1.5) * t.S()) +
              frac(5 * t.S2h(), 8 * K * K * D * t.Leta() + p(K, 2.5) * t.S())) +
         2 * C_H / p(K, 1.25);
}

double strong_weak_optimality(const Terms& t, double Hstar, double alpha) {
  const double K = t.K, D = t.D;
  return Hstar * D * D / alpha *
         (32 * (t.LF / (K * K) + t.LH / p(K, 2.25)) + 4 * t.S() / p(K, 1.5) +
          frac(2 * (5 * t.S2() + t.N()), 8 * K * t.Leta() + p(K, 1.5) * t.S()) +
          frac(10 * t.S2(), 8 * K * K * t.Leta() + p(K, 2.5) * t.S()));
}

double strong_weak_distance(const Terms& t, double alpha) {
  const double K = t.K, D = t.D;
  return D / alpha *
         (32 * D * (t.LF / (K * K) + t.LH / p(K, 2.25)) + 4 * t.S() / p(K, 1.5) +
          frac(10 * t.S2() + 2 * t.N(), 8 * K * D * t.Leta() + p(K, 1.5) * t.S()) +
          frac(10 * t.S2(), 8 * K * K * D * t.Leta() + p(K, 2.5) * t.S()));
}

// --- K-free policy -------------------------------------------------------

double adaptive_optimality(const Terms& t, double D_XF) {
  const double K = t.K, D = t.D;
  const double base_F = t.MF * t.MF + 2 * t.sF * t.sF;
  const double base_H = t.MH * t.MH + 2 * t.sH * t.sH;
  // t.eta is η_{K-1} here; one denominator carries η_{K-1} unsquared.
  return (D * D + D_XF * D_XF) / D *
             (16 * D * t.Leta() / p(K, 0.75) + 2 * t.S() / p(K, 0.25)) +
         frac(5 * D * t.S2(), 8 * p(K, 0.75) * D * t.Leta() +
                                  p(K, 1.25) * std::sqrt(base_F + t.eta * base_H)) +
         frac(D * (20 * base_F + t.sF * t.sF), 3 * p(K, 0.25) * std::sqrt(base_F)) +
         frac(D * (10 * base_H + t.sH * t.sH), p(K, 0.5) * std::sqrt(base_H));
}

double adaptive_feasibility(const Terms& t, double eta1, double C_H) {
  const double K = t.K, D = t.D;
  const double etaK = t.eta;
  const double base_F = t.MF * t.MF + 2 * t.sF * t.sF;
  const double base_H = t.MH * t.MH + 2 * t.sH * t.sH;
  return D * (32 * D * t.Leta() / K + 2 * t.S() / p(K, 0.5)) +
         2 * D / K *
             (2 * D * (2 * t.LF + (etaK + eta1) * t.LH) + 2 * t.MF + 4 * t.sF +
              (etaK + eta1) * (t.MH + 2 * t.sH)) +
         4 * D * p(K + 2, 0.75) / K *
             (2 * D * (t.LF + eta1 * t.LH) + t.MF + 2 * t.sF + eta1 * (t.MH + 2 * t.sH)) +
         frac(D * (20 * base_F + t.sF * t.sF), 3 * p(K, 0.5) * std::sqrt(base_F)) +
         frac(D * (10 * base_H + t.sH * t.sH), p(K, 0.75) * std::sqrt(base_H)) +
         2 * C_H * D / p(K, 0.25);
}

// --- smooth inner operator -----------------------------------------------

struct SmoothNoise {
  double Q2;  // quantity under the square root
  double N;   // variance added in the numerators
};

double smooth_optimality(const Terms& t, const SmoothNoise& q) {
  const double K = t.K, D = t.D;
  const double Q = std::sqrt(q.Q2);
  return D * ((16 * D * (t.LF / p(K, 0.5) + t.LH / K) + 2 * Q / p(K, 0.5)) +
              frac(5 * q.Q2 + q.N, 8 * D * p(K, 0.5) * t.Leta() + p(K, 0.5) * Q) +
              frac(5 * q.Q2, 8 * D * p(K, 1.5) * t.Leta() + p(K, 1.5) * Q));
}

double smooth_feasibility(const Terms& t, const SmoothNoise& q, double C_H) {
  const double K = t.K, D = t.D;
  const double Q = std::sqrt(q.Q2);
  return D * ((16 * D * (t.LF / K + t.LH / p(K, 1.5)) + Q / K) +
              frac(5 * q.Q2 + q.N, 8 * D * K * t.Leta() + K * Q) +
              frac(5 * q.Q2, 8 * D * K * K * t.Leta() + K * K * Q) + 2 * C_H / p(K, 0.5));
}

double smooth_lower_bracket(const Terms& t, double C_H) {
  const double K = t.K, D = t.D;
  const double Q2 = t.MH * t.MH + 2 * t.sH * t.sH;
  const double Q = std::sqrt(Q2);
  return 2 * D * D * (8 * (t.LF / p(K, 0.5) + t.LH / K) + Q / p(K, 0.5)) +
         frac(5 * Q2 + t.sH * t.sH, 8 * p(K, 0.5) * t.Leta() + p(K, 0.5) * Q) +
         frac(5 * Q2, 8 * p(K, 1.5) * t.Leta() + p(K, 1.5) * std::sqrt(t.MH * t.MH + t.sH * t.sH)) +
         2 * C_H * D / p(K, 0.5);
}

double smooth_strong_optimality(const Terms& t, const SmoothNoise& q) {
  const double K = t.K, D = t.D;
  const double Q = std::sqrt(q.Q2);
  return D * ((16 * D * (t.LF / p(K, 1.5) + t.LH / (K * K)) + 2 * Q / p(K, 1.5)) +
              frac(5 * q.Q2 + q.N, 8 * D * p(K, 1.5) * t.Leta() + p(K, 1.5) * Q) +
              frac(5 * q.Q2, 8 * D * p(K, 1.5) * t.Leta() + p(K, 2.5) * Q));
}

double smooth_strong_feasibility(const Terms& t, const SmoothNoise& q, double C_H) {
  const double K = t.K, D = t.D;
  const double Q = std::sqrt(q.Q2);
  return D * ((16 * D * (t.LF / (K * K) + t.LH / p(K, 2.5)) + Q / (K * K)) +
              frac(5 * q.Q2 + q.N, 8 * D * K * K * t.Leta() + K * K * Q) +
              frac(5 * q.Q2, 8 * D * K * K * K * t.Leta() + K * K * K * Q) + 2 * C_H / p(K, 1.5));
}

}  // namespace

BoundReport theoretical_bounds(PolicyKind policy, const ProblemConstants& c,
                               const BoundInputs& in, std::int64_t K) {
  if (K < 2) throw ConfigError("horizon K must be at least 2");
  if (!(in.D_X > 0.0)) throw ConfigError("D_X must be positive");
  c.validate();
  const double C_H = ProblemConstants::require(c.C_H, "C_H");
  const double D = in.D_X;
  const double Kd = static_cast<double>(K);
  const bool lower_available = c.alpha.has_value() && c.B_H.has_value();

  BoundReport r;
  r.policy = policy;
  r.K = K;

  const auto weak_eta = [&] {
    if (in.eta) return *in.eta;
    return ProblemConstants::require(c.alpha, "alpha") /
           (2.0 * ProblemConstants::require(c.H_at_xstar_norm, "H_at_xstar_norm"));
  };

  switch (policy) {
    case PolicyKind::MonotoneFixed: {
      const Terms t = make_terms(c, D, K, std::pow(Kd, -0.25));
      r.optimality_upper = monotone_optimality(t);
      const double bracket = monotone_feasibility_bracket(t, C_H);
      r.feasibility_upper = D * bracket;
      if (lower_available) r.optimality_lower = -(*c.B_H * D / *c.alpha) * bracket;
      r.optimality_label = "monotone-fixed/optimality-upper";
      r.feasibility_label = "monotone-fixed/feasibility-upper";
      r.lower_label = "monotone-fixed/weak-sharp-lower";
      break;
    }
    case PolicyKind::WeakSharp: {
      const double alpha = ProblemConstants::require(c.alpha, "alpha");
      const double Hstar = ProblemConstants::require(c.H_at_xstar_norm, "H_at_xstar_norm");
      const Terms t = make_terms(c, D, K, weak_eta());
      r.optimality_upper = weak_optimality(t, Hstar, alpha);
      r.feasibility_upper = weak_distance(t, alpha);
      r.feasibility_measure = "dist";
      if (c.B_H) r.optimality_lower = -*c.B_H * r.feasibility_upper;
      r.optimality_label = "weak-sharp/optimality-upper";
      r.feasibility_label = "weak-sharp/distance-upper";
      r.lower_label = "weak-sharp/-B_H*distance-upper";
      break;
    }
    case PolicyKind::StronglyMonotone: {
      const Terms t = make_terms(c, D, K, std::pow(Kd, -0.25));
      r.optimality_upper = strong_optimality(t);
      r.feasibility_upper = strong_feasibility(t, C_H);
      if (lower_available) r.optimality_lower = -(*c.B_H / *c.alpha) * strong_lower_bracket(t, C_H);
      r.optimality_label = "strongly-monotone/optimality-upper";
      r.feasibility_label = "strongly-monotone/feasibility-upper";
      r.lower_label = "strongly-monotone/weak-sharp-lower";
      break;
    }
    case PolicyKind::StronglyMonotoneWeakSharp: {
      const double alpha = ProblemConstants::require(c.alpha, "alpha");
      const double Hstar = ProblemConstants::require(c.H_at_xstar_norm, "H_at_xstar_norm");
      const Terms t = make_terms(c, D, K, weak_eta());
      r.optimality_upper = strong_weak_optimality(t, Hstar, alpha);
      r.feasibility_upper = strong_weak_distance(t, alpha);
      r.feasibility_measure = "dist";
      if (c.B_H) r.optimality_lower = -*c.B_H * r.feasibility_upper;
      r.optimality_label = "strongly-monotone-weak-sharp/optimality-upper";
      r.feasibility_label = "strongly-monotone-weak-sharp/distance-upper";
      r.lower_label = "strongly-monotone-weak-sharp/-B_H*distance-upper";
      break;
    }
    case PolicyKind::AdaptiveKFree: {
      const double eta_last = std::pow(Kd, -0.25);  // η_{K-1} = K^{-1/4}
      const double eta1 = std::pow(2.0, -0.25);
      const Terms t = make_terms(c, D, K, eta_last);
      r.optimality_upper = adaptive_optimality(t, in.D_XF.value_or(D));
      r.feasibility_upper = adaptive_feasibility(t, eta1, C_H);
      if (lower_available) r.optimality_lower = -(*c.B_H / *c.alpha) * r.feasibility_upper;
      r.optimality_label = "adaptive-k-free/optimality-upper";
      r.feasibility_label = "adaptive-k-free/feasibility-upper";
      r.lower_label = "adaptive-k-free/weak-sharp-lower";
      break;
    }
    case PolicyKind::SmoothStochasticMiniBatch: {
      const Terms t = make_terms(c, D, K, std::pow(Kd, -0.5));
      const SmoothNoise q{c.M_H * c.M_H + 2 * (c.sigma_H * c.sigma_H + c.sigma_F * c.sigma_F),
                          c.sigma_H * c.sigma_H + c.sigma_F * c.sigma_F};
      r.optimality_upper = smooth_optimality(t, q);
      r.feasibility_upper = smooth_feasibility(t, q, C_H);
      if (lower_available) r.optimality_lower = -(*c.B_H / *c.alpha) * r.feasibility_upper;
      r.optimality_label = "smooth-stochastic-minibatch/optimality-upper";
      r.feasibility_label = "smooth-stochastic-minibatch/feasibility-upper";
      r.lower_label = "smooth-stochastic-minibatch/-(B_H/alpha)*feasibility-upper";
      break;
    }
    case PolicyKind::SmoothDeterministic: {
      const Terms t = make_terms(c, D, K, std::pow(Kd, -0.5));
      const SmoothNoise q{c.M_H * c.M_H + 2 * c.sigma_H * c.sigma_H, c.sigma_H * c.sigma_H};
      r.optimality_upper = smooth_optimality(t, q);
      r.feasibility_upper = smooth_feasibility(t, q, C_H);
      if (lower_available) r.optimality_lower = -(*c.B_H / *c.alpha) * smooth_lower_bracket(t, C_H);
      r.optimality_label = "smooth-deterministic/optimality-upper";
      r.feasibility_label = "smooth-deterministic/feasibility-upper";
      r.lower_label = "smooth-deterministic/weak-sharp-lower";
      break;
    }
    case PolicyKind::SmoothDeterministicStronglyMonotone: {
      const Terms t = make_terms(c, D, K, std::pow(Kd, -0.5));
      const SmoothNoise q{c.M_H * c.M_H + 2 * c.sigma_H * c.sigma_H, c.sigma_H * c.sigma_H};
      r.optimality_upper = smooth_strong_optimality(t, q);
      r.feasibility_upper = smooth_strong_feasibility(t, q, C_H);
      if (lower_available) r.optimality_lower = -(*c.B_H / *c.alpha) * r.feasibility_upper;
      r.optimality_label = "smooth-deterministic-strongly-monotone/optimality-upper";
      r.feasibility_label = "smooth-deterministic-strongly-monotone/feasibility-upper";
      r.lower_label = "smooth-deterministic-strongly-monotone/-(B_H/alpha)*feasibility-upper";
      break;
    }
  }
  return r;
}

}  // namespace ropex
