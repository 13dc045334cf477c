#include "ropex/schedules.hpp"

#include "ropex/csv.hpp"
#include "ropex/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <system_error>

namespace ropex {

namespace {

struct PolicyName {
  PolicyKind kind;
  std::string_view name;
};

constexpr PolicyName kPolicyNames[] = {
    {PolicyKind::MonotoneFixed, "monotone-fixed"},
    {PolicyKind::WeakSharp, "weak-sharp"},
    {PolicyKind::StronglyMonotone, "strongly-monotone"},
    {PolicyKind::StronglyMonotoneWeakSharp, "strongly-monotone-weak-sharp"},
    {PolicyKind::AdaptiveKFree, "adaptive-k-free"},
    {PolicyKind::SmoothStochasticMiniBatch, "smooth-stochastic-minibatch"},
    {PolicyKind::SmoothDeterministic, "smooth-deterministic"},
    {PolicyKind::SmoothDeterministicStronglyMonotone, "smooth-deterministic-strongly-monotone"},
};

bool is_smooth(PolicyKind p) {
  return p == PolicyKind::SmoothStochasticMiniBatch || p == PolicyKind::SmoothDeterministic ||
         p == PolicyKind::SmoothDeterministicStronglyMonotone;
}

bool is_smooth_deterministic(PolicyKind p) {
  return p == PolicyKind::SmoothDeterministic ||
         p == PolicyKind::SmoothDeterministicStronglyMonotone;
}

double checked_gamma(double numerator, double denominator) {
  if (!(denominator > 0.0)) {
    throw ConfigError("step size undefined: L_F, L_H, M and sigma constants are all zero");
  }
  return numerator / denominator;
}

}  // namespace

std::string_view to_string(PolicyKind p) {
  for (const auto& n : kPolicyNames) {
    if (n.kind == p) return n.name;
  }
  return "unknown";
}

PolicyKind parse_policy(std::string_view name) {
  for (const auto& n : kPolicyNames) {
    if (n.name == name) return n.kind;
  }
  throw ConfigError("unknown policy '" + std::string(name) + "'");
}

bool is_strongly_monotone(PolicyKind p) {
  return p == PolicyKind::StronglyMonotone || p == PolicyKind::StronglyMonotoneWeakSharp ||
         p == PolicyKind::SmoothDeterministicStronglyMonotone;
}

bool is_weak_sharp(PolicyKind p) {
  return p == PolicyKind::WeakSharp || p == PolicyKind::StronglyMonotoneWeakSharp;
}

bool uses_increasing_weights(PolicyKind p) { return is_strongly_monotone(p); }

void check_policy_requirements(PolicyKind p, const ProblemConstants& c) {
  c.validate();
  const std::string who(to_string(p));
  if (is_weak_sharp(p)) {
    if (!c.alpha) throw ConfigError(who + " requires the weak-sharpness modulus alpha");
    if (!c.H_at_xstar_norm) throw ConfigError(who + " requires H_at_xstar_norm");
  }
  if (is_strongly_monotone(p) && !(c.mu_H > 0.0)) {
    throw ConfigError(who + " requires mu_H > 0 (strongly monotone outer operator)");
  }
  if (is_smooth(p) && c.M_F != 0.0) {
    throw ConfigError(who + " requires M_F = 0 (smooth inner operator)");
  }
  if (is_smooth_deterministic(p) && c.sigma_F != 0.0) {
    throw ConfigError(who + " requires sigma_F = 0 (deterministic inner operator)");
  }
}

double nonsmooth_gamma(const ProblemConstants& c, double D_X, double eta, double count) {
  const double noise = c.M_F * c.M_F + 2.0 * c.sigma_F * c.sigma_F +
                       eta * eta * (c.M_H * c.M_H + 2.0 * c.sigma_H * c.sigma_H);
  return checked_gamma(D_X, 8.0 * D_X * (c.L_F + eta * c.L_H) + std::sqrt(count * noise));
}

Schedule build_schedule(PolicyKind policy, const ProblemConstants& constants, double D_X,
                        std::int64_t K, const ScheduleOptions& options) {
  if (K < 2) throw ConfigError("horizon K must be at least 2");
  if (!(D_X > 0.0) || !std::isfinite(D_X)) throw ConfigError("D_X must be positive");
  if (options.eta_override && !is_weak_sharp(policy)) {
    throw ConfigError("eta override only applies to the weak-sharp policies");
  }
  ProblemConstants c = constants;
  if (is_weak_sharp(policy) && options.eta_override) {
    // The override stands in for α / (2 ||H(x*)||); the remaining checks still apply.
    if (!(*options.eta_override > 0.0)) throw ConfigError("eta override must be positive");
    c.alpha = c.alpha.value_or(1.0);
    c.H_at_xstar_norm = c.H_at_xstar_norm.value_or(1.0);
  }
  check_policy_requirements(policy, c);

  Schedule s;
  s.policy = policy;
  s.K = K;
  s.D_X = D_X;
  s.batch_size = options.batch_size.value_or(
      policy == PolicyKind::SmoothStochasticMiniBatch ? static_cast<std::uint64_t>(K) : 1);
  if (s.batch_size == 0) throw ConfigError("batch size must be at least 1");
  s.rows.reserve(static_cast<std::size_t>(K - 1));

  const double Kd = static_cast<double>(K);
  const double eta_quarter = std::pow(Kd, -0.25);
  const double eta_half = std::pow(Kd, -0.5);
  const auto weak_eta = [&] {
    return options.eta_override.value_or(*c.alpha / (2.0 * *c.H_at_xstar_norm));
  };

  for (std::int64_t k = 1; k < K; ++k) {
    const double kd = static_cast<double>(k);
    ScheduleRow r;
    r.k = k;
    switch (policy) {
      case PolicyKind::MonotoneFixed:
        r.eta = eta_quarter;
        r.gamma = nonsmooth_gamma(c, D_X, r.eta, Kd);
        break;
      case PolicyKind::WeakSharp:
        r.eta = weak_eta();
        r.gamma = nonsmooth_gamma(c, D_X, r.eta, Kd);
        break;
      case PolicyKind::StronglyMonotone:
        r.tau = kd + 1.0;
        r.theta = kd / (kd + 1.0);
        r.eta = eta_quarter;
        r.gamma = nonsmooth_gamma(c, D_X, r.eta, Kd);
        break;
      case PolicyKind::StronglyMonotoneWeakSharp:
        r.tau = kd + 1.0;
        r.theta = kd / (kd + 1.0);
        r.eta = weak_eta();
        r.gamma = nonsmooth_gamma(c, D_X, r.eta, Kd);
        break;
      case PolicyKind::AdaptiveKFree:
        r.eta = std::pow(kd + 1.0, -0.25);
        r.theta = std::pow(kd / (kd + 1.0), 0.25);
        r.gamma = nonsmooth_gamma(c, D_X, r.eta, kd);
        break;
      case PolicyKind::SmoothStochasticMiniBatch:
        r.eta = eta_half;
        r.gamma = checked_gamma(
            D_X, 8.0 * D_X * (c.L_F + r.eta * c.L_H) +
                     std::sqrt(c.M_H * c.M_H +
                               2.0 * (c.sigma_H * c.sigma_H + c.sigma_F * c.sigma_F)));
        break;
      case PolicyKind::SmoothDeterministic:
      case PolicyKind::SmoothDeterministicStronglyMonotone:
        if (policy == PolicyKind::SmoothDeterministicStronglyMonotone) {
          r.tau = kd + 1.0;
          r.theta = kd / (kd + 1.0);
        }
        r.eta = eta_half;
        r.gamma = checked_gamma(D_X, 8.0 * D_X * (c.L_F + r.eta * c.L_H) +
                                         std::sqrt(c.M_H * c.M_H + 2.0 * c.sigma_H * c.sigma_H));
        break;
    }
    s.rows.push_back(r);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const ConditionCheck* ValidationReport::find(std::string_view name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

namespace {

class Checker {
 public:
  explicit Checker(std::string name) { check_.name = std::move(name); }

  void inequality(std::int64_t k, double lhs, double rhs) {
    record(k, lhs - rhs, lhs <= rhs);
  }

  void equality(std::int64_t k, double lhs, double rhs) {
    const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
    const double rel = std::abs(lhs - rhs) / scale;
    record(k, rel, rel <= kEqualityTolerance);
  }

  ConditionCheck result() && { return std::move(check_); }

 private:
  void record(std::int64_t k, double residual, bool ok) {
    check_.worst = std::max(check_.worst, residual);
    if (!ok && check_.passed) {
      check_.passed = false;
      check_.first_violation = k;
    }
  }

  ConditionCheck check_;
};

}  // namespace

ValidationReport validate_conditions(const Schedule& schedule, const ProblemConstants& constants) {
  return validate_conditions(schedule.policy, schedule.rows, constants, schedule.K);
}

ValidationReport validate_conditions(PolicyKind policy, const std::vector<ScheduleRow>& rows,
                                     const ProblemConstants& c, std::int64_t K) {
  ValidationReport report;
  report.policy = policy;

  const bool strong = is_strongly_monotone(policy);
  const bool adaptive = policy == PolicyKind::AdaptiveKFree;
  const double mu = c.mu_H;

  std::int64_t first_k = 2;
  if (strong && mu > 0.0 && rows.size() >= 2) {
    double worst = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      worst = std::max(worst, 1.0 / (2.0 * rows[i].gamma * rows[i - 1].eta * mu));
    }
    const auto k_min = static_cast<std::int64_t>(std::ceil(worst));
    report.min_admissible_k = std::max<std::int64_t>(k_min, 2);
    report.horizon_ok = K >= *report.min_admissible_k;
    first_k = *report.min_admissible_k;
  }

  Checker step_ratio(strong ? "strong-step-ratio" : "step-ratio");
  Checker balance("extrapolation-balance");
  Checker coupling("lipschitz-coupling");
  Checker weighted(strong ? "strong-weighted-step" : "weighted-step");
  Checker weights("weight-balance");

  for (std::size_t i = 1; i < rows.size(); ++i) {
    const ScheduleRow& r = rows[i];
    const ScheduleRow& p = rows[i - 1];
    const std::int64_t k = r.k;

    balance.equality(k, r.tau * r.theta / r.eta, p.tau / p.eta);
    coupling.inequality(k, r.theta * (c.L_F * c.L_F + r.eta * r.eta * c.L_H * c.L_H),
                        1.0 / (50.0 * r.gamma * p.gamma));
    if (adaptive) continue;

    weights.equality(k, r.tau * r.theta, p.tau);
    if (strong) {
      if (k < first_k) continue;
      step_ratio.inequality(k, r.tau / (2.0 * r.gamma * r.eta),
                            p.tau / p.eta * (1.0 / (2.0 * p.gamma) + p.eta * mu));
      weighted.inequality(k, r.tau / (2.0 * r.gamma),
                          p.tau * (1.0 / (2.0 * p.gamma) + p.eta * mu));
    } else {
      step_ratio.inequality(k, r.tau / (r.gamma * r.eta), p.tau / (p.gamma * p.eta));
      weighted.inequality(k, r.tau / r.gamma, p.tau / p.gamma);
    }
  }

  if (!adaptive) report.checks.push_back(std::move(step_ratio).result());
  report.checks.push_back(std::move(balance).result());
  report.checks.push_back(std::move(coupling).result());
  if (!adaptive) {
    report.checks.push_back(std::move(weighted).result());
    report.checks.push_back(std::move(weights).result());
  }
  return report;
}

void write_schedule_csv(std::ostream& os, const Schedule& schedule) {
  os << "k,tau,theta,eta,gamma\n";
  for (const auto& r : schedule.rows) {
    os << r.k << ',' << csv::number(r.tau) << ',' << csv::number(r.theta) << ','
       << csv::number(r.eta) << ',' << csv::number(r.gamma) << '\n';
  }
}

}  // namespace ropex
