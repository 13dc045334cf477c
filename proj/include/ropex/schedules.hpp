#pragma once

// Step-size policies (τ_k, θ_k, η_k, γ_k), their validity conditions and the
// closed-form convergence bounds they come with.

#include "ropex/vi_core.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ropex {

enum class PolicyKind {
  MonotoneFixed,
  WeakSharp,
  StronglyMonotone,
  StronglyMonotoneWeakSharp,
  AdaptiveKFree,
  SmoothStochasticMiniBatch,
  SmoothDeterministic,
  SmoothDeterministicStronglyMonotone,
};

inline constexpr PolicyKind kAllPolicies[] = {
    PolicyKind::MonotoneFixed,
    PolicyKind::WeakSharp,
    PolicyKind::StronglyMonotone,
    PolicyKind::StronglyMonotoneWeakSharp,
    PolicyKind::AdaptiveKFree,
    PolicyKind::SmoothStochasticMiniBatch,
    PolicyKind::SmoothDeterministic,
    PolicyKind::SmoothDeterministicStronglyMonotone,
};

std::string_view to_string(PolicyKind p);
/// Accepts the kebab-case names printed by to_string. Throws ConfigError.
PolicyKind parse_policy(std::string_view name);

bool is_strongly_monotone(PolicyKind p);
bool is_weak_sharp(PolicyKind p);
bool uses_increasing_weights(PolicyKind p);

/// Throws ConfigError naming the first requirement the constants fail.
void check_policy_requirements(PolicyKind p, const ProblemConstants& c);

struct ScheduleRow {
  std::int64_t k = 1;
  double tau = 1.0;
  double theta = 1.0;
  double eta = 0.0;
  double gamma = 0.0;
};

struct ScheduleOptions {
  /// Replaces η for the weak-sharp variants (default α / (2 ||H(x*)||)).
  std::optional<double> eta_override;
  /// Mini-batch size for F; SmoothStochasticMiniBatch defaults to K.
  std::optional<std::uint64_t> batch_size;
};

struct Schedule {
  PolicyKind policy = PolicyKind::MonotoneFixed;
  std::int64_t K = 0;
  double D_X = 0.0;
  std::uint64_t batch_size = 1;
  /// Rows for k = 1 .. K-1.
  std::vector<ScheduleRow> rows;
};

/// Realizes the policy's rows for k = 1..K-1.
/// Throws ConfigError for missing constants, K < 2 or D_X <= 0.
Schedule build_schedule(PolicyKind policy, const ProblemConstants& constants, double D_X,
                        std::int64_t K, const ScheduleOptions& options = {});

/// γ of the fixed nonsmooth policies for a given η and horizon/iteration count.
double nonsmooth_gamma(const ProblemConstants& c, double D_X, double eta, double count);

struct ConditionCheck {
  std::string name;
  bool passed = true;
  std::optional<std::int64_t> first_violation;
  /// Largest relative residual of an equality, or the largest lhs - rhs of an
  /// inequality (negative when satisfied with slack).
  double worst = -std::numeric_limits<double>::infinity();
};

struct ValidationReport {
  PolicyKind policy = PolicyKind::MonotoneFixed;
  std::vector<ConditionCheck> checks;
  /// Strongly monotone variants only: the μ-augmented inequalities hold from
  /// this iteration on; the analysis needs K >= this value.
  std::optional<std::int64_t> min_admissible_k;
  bool horizon_ok = true;

  bool passed() const;
  const ConditionCheck* find(std::string_view name) const;
};

inline constexpr double kEqualityTolerance = 1e-12;

/// Checks the conditions that the policy class's analysis relies on.
ValidationReport validate_conditions(const Schedule& schedule, const ProblemConstants& constants);
ValidationReport validate_conditions(PolicyKind policy, const std::vector<ScheduleRow>& rows,
                                     const ProblemConstants& constants, std::int64_t K);

struct BoundReport {
  PolicyKind policy = PolicyKind::MonotoneFixed;
  std::int64_t K = 0;
  double optimality_upper = 0.0;
  /// Feasibility gap bound, or for the weak-sharp variants a bound on
  /// E[dist(x̄_K, X_F*)]; see feasibility_measure.
  double feasibility_upper = 0.0;
  /// Present when alpha and B_H are known.
  std::optional<double> optimality_lower;
  std::string feasibility_measure = "gap";
  std::string optimality_label;
  std::string feasibility_label;
  std::string lower_label;
};

struct BoundInputs {
  double D_X = 0.0;
  /// Radius of X_F*; only the adaptive optimality bound reads it (defaults to D_X).
  std::optional<double> D_XF;
  /// Override η (weak-sharp variants); otherwise taken from the policy.
  std::optional<double> eta;
};

/// Evaluates the printed right-hand sides at horizon K. C_H is read from the
/// constants and is required; alpha and B_H enable the lower bound.
BoundReport theoretical_bounds(PolicyKind policy, const ProblemConstants& constants,
                               const BoundInputs& inputs, std::int64_t K);

/// CSV with header "k,tau,theta,eta,gamma".
void write_schedule_csv(std::ostream& os, const Schedule& schedule);

}  // namespace ropex
