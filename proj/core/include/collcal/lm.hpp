#pragma once

// Dense Levenberg-Marquardt for small parameter vectors with per-block
// robust weighting. Residuals come in fixed-size blocks (one block per
// observed point); the robust loss acts on each block's squared norm.

#include <Eigen/Core>

#include <functional>
#include <string_view>
#include <vector>

namespace collcal {

struct LMSettings {
  int max_iterations{100};
  double gradient_tolerance{1e-12};
  double parameter_tolerance{1e-12};
  double cost_tolerance{1e-14};
  double initial_damping{1e-3};

  /// Throws ConfigInvalid unless every field is positive.
  void validate() const;
};

struct RobustCost {
  enum class Kind { kSquared, kHuber };
  Kind kind{Kind::kHuber};
  double huber_delta_px{1.0};

  [[nodiscard]] static RobustCost squared() { return {Kind::kSquared, 1.0}; }
  [[nodiscard]] static RobustCost huber(double delta_px) { return {Kind::kHuber, delta_px}; }

  void validate() const;
  /// rho(s) for a squared block norm s.
  [[nodiscard]] double rho(double s) const;
  /// d rho / d s.
  [[nodiscard]] double weight(double s) const;
};

[[nodiscard]] std::string_view to_string(RobustCost::Kind kind) noexcept;

struct LMIteration {
  int iteration{0};
  double cost{0.0};  // cost after the step if accepted, else the candidate cost
  double damping{0.0};
  double step_norm{0.0};
  bool accepted{false};
  bool valid{true};  // false when the candidate left the model's domain
};

enum class LMStatus {
  kGradientTolerance,
  kParameterTolerance,
  kCostTolerance,
  kMachinePrecision,  // cost at the floating-point floor of the residuals
  kNoFurtherDecrease,  // damping overflow: no descent step representable
  kMaxIterations,
  kNoValidStep,  // every candidate near the current point was invalid
};

[[nodiscard]] std::string_view to_string(LMStatus status) noexcept;

struct LMSummary {
  LMStatus status{LMStatus::kMaxIterations};
  int iterations{0};
  int accepted_steps{0};
  double initial_cost{0.0};
  double final_cost{0.0};
  double final_gradient_norm{0.0};
  std::vector<LMIteration> trace;

  [[nodiscard]] bool converged() const noexcept {
    return status != LMStatus::kMaxIterations && status != LMStatus::kNoValidStep;
  }
};

/// Fills residuals (and the Jacobian of the residuals when non-null) at x.
/// Returns false when x is outside the model's domain.
using ResidualFunction =
    std::function<bool(const Eigen::VectorXd& x, Eigen::VectorXd& residuals, Eigen::MatrixXd* jacobian)>;

struct LMProblem {
  ResidualFunction evaluate;
  int block_size{2};
  /// Residual magnitude that is pure round-off, e.g. eps * max |observation|.
  double residual_floor{0.0};
};

/// Minimises 0.5 * sum_i rho(|r_i|^2) over x, in place. x must be a valid
/// starting point. Marquardt damping is applied on the diagonal of the
/// weighted Gauss-Newton matrix, which makes the step invariant to the
/// parameters' units.
[[nodiscard]] LMSummary levenberg_marquardt(const LMProblem& problem, const RobustCost& cost,
                                            const LMSettings& settings, Eigen::VectorXd& x);

/// 0.5 * sum_i rho(|r_i|^2).
[[nodiscard]] double robust_cost(const Eigen::VectorXd& residuals, int block_size,
                                 const RobustCost& cost);

}  // namespace collcal
