#include "collcal/lm.hpp"

#include "collcal/errors.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>

namespace collcal {

void LMSettings::validate() const {
  if (max_iterations <= 0) throw ConfigInvalid("lm: max_iterations must be positive");
  if (!(gradient_tolerance > 0.0)) throw ConfigInvalid("lm: gradient_tolerance must be positive");
  if (!(parameter_tolerance > 0.0)) throw ConfigInvalid("lm: parameter_tolerance must be positive");
  if (!(cost_tolerance > 0.0)) throw ConfigInvalid("lm: cost_tolerance must be positive");
  if (!(initial_damping > 0.0)) throw ConfigInvalid("lm: initial_damping must be positive");
}

void RobustCost::validate() const {
  if (kind == Kind::kHuber && !(huber_delta_px > 0.0))
    throw ConfigInvalid("robust cost: huber delta must be > 0");
}

double RobustCost::rho(double s) const {
  if (kind == Kind::kSquared) return s;
  const double d2 = huber_delta_px * huber_delta_px;
  return s <= d2 ? s : 2.0 * huber_delta_px * std::sqrt(s) - d2;
}

double RobustCost::weight(double s) const {
  if (kind == Kind::kSquared) return 1.0;
  const double d2 = huber_delta_px * huber_delta_px;
  return s <= d2 ? 1.0 : huber_delta_px / std::sqrt(s);
}

std::string_view to_string(RobustCost::Kind kind) noexcept {
  return kind == RobustCost::Kind::kSquared ? "squared" : "huber";
}

std::string_view to_string(LMStatus status) noexcept {
  switch (status) {
    case LMStatus::kGradientTolerance: return "gradient_tolerance";
    case LMStatus::kParameterTolerance: return "parameter_tolerance";
    case LMStatus::kCostTolerance: return "cost_tolerance";
    case LMStatus::kMachinePrecision: return "machine_precision";
    case LMStatus::kNoFurtherDecrease: return "no_further_decrease";
    case LMStatus::kMaxIterations: return "max_iterations";
    case LMStatus::kNoValidStep: return "no_valid_step";
  }
  return "unknown";
}

double robust_cost(const Eigen::VectorXd& residuals, int block_size, const RobustCost& cost) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < residuals.size(); i += block_size)
    total += cost.rho(residuals.segment(i, block_size).squaredNorm());
  return 0.5 * total;
}

namespace {

constexpr double kMaxDamping = 1e32;

struct NormalEquations {
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
};

// IRLS form: each block contributes w_i J_i^T J_i and w_i J_i^T r_i, with
// w_i = rho'(|r_i|^2). The sums run in block order so results are bit-stable.
NormalEquations build_normal_equations(const Eigen::VectorXd& r, const Eigen::MatrixXd& J,
                                       int block_size, const RobustCost& cost) {
  const auto p = J.cols();
  NormalEquations ne{Eigen::MatrixXd::Zero(p, p), Eigen::VectorXd::Zero(p)};
  for (Eigen::Index i = 0; i < r.size(); i += block_size) {
    const auto ri = r.segment(i, block_size);
    const auto Ji = J.middleRows(i, block_size);
    const double w = cost.weight(ri.squaredNorm());
    ne.H.noalias() += w * Ji.transpose() * Ji;
    ne.g.noalias() += w * Ji.transpose() * ri;
  }
  return ne;
}

}  // namespace

LMSummary levenberg_marquardt(const LMProblem& problem, const RobustCost& cost,
                              const LMSettings& settings, Eigen::VectorXd& x) {
  settings.validate();
  cost.validate();

  const auto p = x.size();
  Eigen::VectorXd r;
  Eigen::MatrixXd J;
  if (!problem.evaluate(x, r, &J))
    throw GeometryError("levenberg_marquardt: starting point is outside the model domain");

  LMSummary summary;
  double current = robust_cost(r, problem.block_size, cost);
  summary.initial_cost = current;
  const double floor_cost =
      0.5 * static_cast<double>(r.size()) * problem.residual_floor * problem.residual_floor;

  double damping = settings.initial_damping;
  bool need_linearization = true;
  NormalEquations ne;
  int invalid_since_accept = 0;
  int rejected_since_accept = 0;

  auto finish = [&](LMStatus status) {
    summary.status = status;
    summary.final_cost = current;
    summary.final_gradient_norm = ne.g.size() ? ne.g.lpNorm<Eigen::Infinity>() : 0.0;
    return summary;
  };

  while (true) {
    if (need_linearization) {
      ne = build_normal_equations(r, J, problem.block_size, cost);
      need_linearization = false;
    }
    if (current <= floor_cost) return finish(LMStatus::kMachinePrecision);
    if (ne.g.lpNorm<Eigen::Infinity>() <= settings.gradient_tolerance)
      return finish(LMStatus::kGradientTolerance);
    if (summary.iterations >= settings.max_iterations) return finish(LMStatus::kMaxIterations);
    if (damping > kMaxDamping) {
      if (invalid_since_accept > 0 && invalid_since_accept == rejected_since_accept)
        return finish(LMStatus::kNoValidStep);
      return finish(LMStatus::kNoFurtherDecrease);
    }

    ++summary.iterations;
    const Eigen::VectorXd diag = ne.H.diagonal();
    const double diag_floor = 1e-12 * std::max(diag.maxCoeff(), 1e-300);
    Eigen::MatrixXd A = ne.H;
    for (Eigen::Index i = 0; i < p; ++i) A(i, i) += damping * std::max(diag(i), diag_floor);
    const Eigen::VectorXd step = A.ldlt().solve(-ne.g);

    LMIteration it;
    it.iteration = summary.iterations;
    it.damping = damping;
    it.step_norm = step.norm();

    if (!step.allFinite()) {
      it.valid = false;
      it.cost = current;
      summary.trace.push_back(it);
      damping *= 10.0;
      ++rejected_since_accept;
      continue;
    }
    if (step.norm() <= settings.parameter_tolerance * (x.norm() + settings.parameter_tolerance)) {
      it.cost = current;
      summary.trace.push_back(it);
      return finish(LMStatus::kParameterTolerance);
    }
    // Decrease predicted by the weighted quadratic model.
    const double predicted = -(ne.g.dot(step) + 0.5 * step.dot(ne.H * step));
    if (predicted >= 0.0 && predicted <= settings.cost_tolerance * current) {
      it.cost = current;
      summary.trace.push_back(it);
      return finish(LMStatus::kCostTolerance);
    }

    Eigen::VectorXd x_new = x + step;
    Eigen::VectorXd r_new;
    Eigen::MatrixXd J_new;
    if (!problem.evaluate(x_new, r_new, &J_new)) {
      it.valid = false;
      it.cost = current;
      summary.trace.push_back(it);
      damping *= 10.0;
      ++invalid_since_accept;
      ++rejected_since_accept;
      continue;
    }

    const double candidate = robust_cost(r_new, problem.block_size, cost);
    it.cost = candidate;
    if (candidate < current) {
      it.accepted = true;
      summary.trace.push_back(it);
      ++summary.accepted_steps;
      const double decrease = current - candidate;
      x = std::move(x_new);
      r = std::move(r_new);
      J = std::move(J_new);
      const double previous = current;
      current = candidate;
      need_linearization = true;
      damping = std::max(damping * 0.1, 1e-300);
      invalid_since_accept = 0;
      rejected_since_accept = 0;
      if (decrease <= settings.cost_tolerance * previous) {
        ne = build_normal_equations(r, J, problem.block_size, cost);
        return finish(LMStatus::kCostTolerance);
      }
    } else {
      summary.trace.push_back(it);
      damping *= 10.0;
      ++rejected_since_accept;
    }
  }
}

}  // namespace collcal
