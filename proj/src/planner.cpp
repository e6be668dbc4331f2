#include "fara/planner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fara/numeric.hpp"

namespace fara {

std::string_view to_string(PlanningMode mode) {
  return mode == PlanningMode::online ? "online" : "post_processing";
}

void PlannerConfig::validate() const {
  if (delta_t < 1) throw ValidationError("delta_t must be at least 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("alpha must lie in [0, 1]");
  if (!(beta >= 0.0)) throw ValidationError("beta must be non-negative");
  if (!(e_min >= 0.0)) throw ValidationError("e_min must be non-negative");
}

std::vector<ItemIndex> relevance_order(std::span<const double> relevance) {
  std::vector<ItemIndex> order(relevance.size());
  std::iota(order.begin(), order.end(), ItemIndex{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](ItemIndex a, ItemIndex b) { return relevance[a] > relevance[b]; });
  return order;
}

double planned_total(const ExaminationCurve& curve, std::size_t delta_t, std::size_t n_items) {
  return static_cast<double>(delta_t) * curve.prefix_mass(curve.list_length(n_items));
}

namespace {

PlanningProblem common_setup(const ExposureLedger& ledger, std::span<const double> relevance_est,
                             const ExaminationCurve& curve, const PlannerConfig& config) {
  config.validate();
  const std::size_t n = relevance_est.size();
  if (n < 2) throw ValidationError("planning needs at least two items");
  if (ledger.n_items() != n) throw ValidationError("ledger and relevance sizes differ");
  for (double r : relevance_est) {
    if (!std::isfinite(r) || r < 0.0) throw ValidationError("relevance estimates must be finite and non-negative");
  }

  PlanningProblem out;
  out.config = config;
  out.n_items = n;
  out.history = ledger.exposures();
  out.quad = build_quadratic(out.history, relevance_est);
  out.total_exposure = planned_total(curve, config.delta_t, n);
  out.max_item_exposure = static_cast<double>(config.delta_t) * curve.prob(1);

  const auto order = relevance_order(relevance_est);
  const std::size_t len = curve.list_length(n);
  CompensatedSum ideal;
  for (std::size_t j = 0; j < len; ++j) ideal.add_product(curve.prob(j + 1), relevance_est[order[j]]);
  out.ndcg_requirement = (1.0 - config.alpha) * static_cast<double>(config.delta_t) * ideal.value();
  return out;
}

}  // namespace

PlanningProblem build_post_qp(const ExposureLedger& ledger, std::span<const double> relevance_est,
                              const ExaminationCurve& curve, const PlannerConfig& config) {
  PlanningProblem out = common_setup(ledger, relevance_est, curve, config);
  const auto n = static_cast<Eigen::Index>(out.n_items);

  QpProblem& qp = out.qp;
  qp = QpProblem::unconstrained(n);
  qp.quadratic = out.quad.hessian;
  qp.linear = -out.quad.gradient;
  qp.equality_matrix = Eigen::MatrixXd::Ones(1, n);
  qp.equality_rhs = Eigen::VectorXd::Constant(1, out.total_exposure);
  qp.inequality_matrix.resize(1, n);
  for (Eigen::Index d = 0; d < n; ++d) qp.inequality_matrix(0, d) = relevance_est[static_cast<std::size_t>(d)];
  qp.inequality_rhs = Eigen::VectorXd::Constant(1, out.ndcg_requirement);
  qp.lower_bounds = Eigen::VectorXd::Zero(n);
  qp.upper_bounds = Eigen::VectorXd::Constant(n, out.max_item_exposure);
  return out;
}

PlanningProblem build_online_qp(const ExposureLedger& ledger, std::span<const double> relevance_est,
                                const ExaminationCurve& curve, const PlannerConfig& config) {
  PlanningProblem out = common_setup(ledger, relevance_est, curve, config);
  const auto n = static_cast<Eigen::Index>(out.n_items);

  QpProblem& qp = out.qp;
  qp = QpProblem::unconstrained(2 * n);
  qp.quadratic.topLeftCorner(n, n) = out.quad.hessian;
  qp.linear.head(n) = -out.quad.gradient;
  qp.linear.tail(n).setConstant(config.beta);

  qp.equality_matrix = Eigen::MatrixXd::Zero(1, 2 * n);
  qp.equality_matrix.leftCols(n).setOnes();
  qp.equality_rhs = Eigen::VectorXd::Constant(1, out.total_exposure);

  qp.inequality_matrix = Eigen::MatrixXd::Zero(1 + n, 2 * n);
  qp.inequality_rhs.resize(1 + n);
  for (Eigen::Index d = 0; d < n; ++d) {
    qp.inequality_matrix(0, d) = relevance_est[static_cast<std::size_t>(d)];
    qp.inequality_matrix(1 + d, d) = 1.0;
    qp.inequality_matrix(1 + d, n + d) = 1.0;
    qp.inequality_rhs[1 + d] = config.e_min - out.history[static_cast<std::size_t>(d)];
  }
  qp.inequality_rhs[0] = out.ndcg_requirement;

  qp.lower_bounds = Eigen::VectorXd::Zero(2 * n);
  qp.upper_bounds.head(n).setConstant(out.max_item_exposure);
  qp.upper_bounds.tail(n).setConstant(kUnbounded);
  return out;
}

PlanningProblem build_planning_qp(const ExposureLedger& ledger, std::span<const double> relevance_est,
                                  const ExaminationCurve& curve, const PlannerConfig& config) {
  return config.mode == PlanningMode::online ? build_online_qp(ledger, relevance_est, curve, config)
                                             : build_post_qp(ledger, relevance_est, curve, config);
}

namespace {

/// Scales the free entries toward the target sum, clamping at [0, upper]
/// and redistributing whatever a clamp absorbs.
void rebalance(std::vector<double>& x, double target, double upper) {
  const std::size_t n = x.size();
  for (std::size_t round = 0; round <= n; ++round) {
    const double sum = compensated_sum(x);
    const double gap = target - sum;
    if (gap == 0.0) return;

    CompensatedSum fixed;
    CompensatedSum movable;
    std::size_t movable_count = 0;
    for (double v : x) {
      const bool can_move = gap > 0.0 ? v < upper : v > 0.0;
      if (can_move) {
        movable.add(v);
        ++movable_count;
      } else {
        fixed.add(v);
      }
    }
    if (movable_count == 0) return;

    const double free_sum = movable.value();
    const double free_target = target - fixed.value();
    bool clamped = false;
    for (double& v : x) {
      const bool can_move = gap > 0.0 ? v < upper : v > 0.0;
      if (!can_move) continue;
      v = free_sum > 0.0 ? v * (free_target / free_sum) : v + gap / static_cast<double>(movable_count);
      if (v > upper) {
        v = upper;
        clamped = true;
      } else if (v < 0.0) {
        v = 0.0;
        clamped = true;
      }
    }
    if (!clamped) break;
  }

  // Push the last rounding residual onto the entry with the most room.
  const double residual = target - compensated_sum(x);
  if (residual == 0.0) return;
  std::size_t best = 0;
  double room = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = residual > 0.0 ? upper - x[i] : x[i];
    if (r > room) {
      room = r;
      best = i;
    }
  }
  x[best] = std::clamp(x[best] + residual, 0.0, upper);
}

}  // namespace

namespace {

/// Checks raw against the 1e-4 feasibility window, then clamps and
/// rebalances it in place.
void repair_exposure(std::vector<double>& delta_e, double total, double upper) {
  double violation = std::abs(compensated_sum(delta_e) - total);
  for (double v : delta_e) {
    if (!std::isfinite(v)) throw InvariantError("plan contains non-finite exposure");
    violation = std::max({violation, -v, v - upper});
  }
  if (violation > 1e-4 * std::max(1.0, total)) {
    throw InvariantError("plan is " + std::to_string(violation) + " away from feasibility");
  }
  for (double& v : delta_e) v = std::clamp(v, 0.0, upper);
  rebalance(delta_e, total, upper);
}

}  // namespace

ExposurePlan repair_plan(const ExposurePlan& raw, const ExaminationCurve& curve, const PlannerConfig& config) {
  const std::size_t n = raw.delta_e.size();
  if (n == 0) throw ValidationError("empty plan");
  for (double s : raw.slack) {
    if (s < -1e-4) throw InvariantError("negative slack " + std::to_string(s));
  }
  ExposurePlan out = raw;
  repair_exposure(out.delta_e, planned_total(curve, config.delta_t, n),
                  static_cast<double>(config.delta_t) * curve.prob(1));
  for (double& s : out.slack) s = std::max(s, 0.0);
  return out;
}

ExposurePlan solve_plan(const PlanningProblem& problem, const QpSettings& settings) {
  const QpSolution solution = solve_qp(problem.qp, settings);
  if (!solution.ok()) {
    throw SolverError("exposure planning QP failed: " + std::string(to_string(solution.status)));
  }
  const std::size_t n = problem.n_items;
  ExposurePlan plan;
  plan.delta_e.assign(solution.x.data(), solution.x.data() + n);
  repair_exposure(plan.delta_e, problem.total_exposure, problem.max_item_exposure);

  double penalty = 0.0;
  if (problem.config.mode == PlanningMode::online) {
    // Optimal slack for the repaired exposure.
    plan.slack.resize(n);
    for (std::size_t d = 0; d < n; ++d) {
      plan.slack[d] = std::max(0.0, problem.config.e_min - problem.history[d] - plan.delta_e[d]);
    }
    penalty = problem.config.beta * compensated_sum(plan.slack);
  }
  plan.objective_value = marginal_fairness(problem.quad, plan.delta_e) - penalty;
  return plan;
}

ExposurePlan ideal_topk_plan(std::span<const double> relevance_est, const ExaminationCurve& curve,
                             std::size_t delta_t) {
  ExposurePlan plan;
  plan.delta_e.assign(relevance_est.size(), 0.0);
  const auto order = relevance_order(relevance_est);
  const std::size_t len = curve.list_length(relevance_est.size());
  for (std::size_t j = 0; j < len; ++j) {
    plan.delta_e[order[j]] = static_cast<double>(delta_t) * curve.prob(j + 1);
  }
  return plan;
}

}  // namespace fara
