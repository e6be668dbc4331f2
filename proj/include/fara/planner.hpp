#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "fara/common.hpp"
#include "fara/fairness.hpp"
#include "fara/metrics.hpp"
#include "fara/qp.hpp"
#include "fara/user_model.hpp"

namespace fara {

enum class PlanningMode { post_processing, online };

std::string_view to_string(PlanningMode mode);

struct PlannerConfig {
  /// Planning horizon: number of future sessions covered by one plan.
  std::size_t delta_t = 50;
  /// Effectiveness/fairness tradeoff; the plan must keep at least
  /// (1 - alpha) of the ideal top-k_s exposure-weighted relevance.
  double alpha = 1.0;
  /// Price per unit of unmet minimum exposure (online mode).
  double beta = 1.0;
  double e_min = 10.0;
  PlanningMode mode = PlanningMode::post_processing;

  void validate() const;
};

/// Planned marginal exposure per item for the next delta_t sessions.
struct ExposurePlan {
  std::vector<double> delta_e;
  /// Unmet minimum exposure per item; empty in post-processing mode.
  std::vector<double> slack;
  /// Achieved change in fairness minus beta * sum(slack).
  double objective_value = 0.0;
};

/// A phase-1 QP together with the data needed to interpret its solution.
struct PlanningProblem {
  QpProblem qp;
  FairnessQuadratic quad;
  PlannerConfig config;
  std::vector<double> history;  // E^t(d)
  std::size_t n_items = 0;
  double total_exposure = 0.0;     // delta_t * sum_{j <= len} P_j
  double max_item_exposure = 0.0;  // delta_t * P_1
  double ndcg_requirement = 0.0;
};

/// Items sorted by descending relevance, ties in canonical order.
std::vector<ItemIndex> relevance_order(std::span<const double> relevance);

/// delta_t times the exposure of one ranklist of length min(k_s, n).
double planned_total(const ExaminationCurve& curve, std::size_t delta_t, std::size_t n_items);

/// Maximize the fairness change subject to the exposure budget, the NDCG
/// floor, and 0 <= dE <= delta_t * P_1. Variables: [dE].
PlanningProblem build_post_qp(const ExposureLedger& ledger, std::span<const double> relevance_est,
                              const ExaminationCurve& curve, const PlannerConfig& config);

/// Post-processing constraints plus slack s >= 0 with s + dE + E^t >= e_min
/// priced at beta. Variables: [dE; s]. E^t enters as data.
PlanningProblem build_online_qp(const ExposureLedger& ledger, std::span<const double> relevance_est,
                                const ExaminationCurve& curve, const PlannerConfig& config);

/// Dispatches on config.mode.
PlanningProblem build_planning_qp(const ExposureLedger& ledger, std::span<const double> relevance_est,
                                  const ExaminationCurve& curve, const PlannerConfig& config);

/// Solves, repairs and books the objective. Throws SolverError when the QP
/// solver does not report an optimal solution.
ExposurePlan solve_plan(const PlanningProblem& problem, const QpSettings& settings = {});

/// Clamps to [0, delta_t * P_1] and rescales so the plan sums exactly to the
/// budget. Throws InvariantError when raw is more than 1e-4 (relative to the
/// budget) away from feasibility.
ExposurePlan repair_plan(const ExposurePlan& raw, const ExaminationCurve& curve, const PlannerConfig& config);

/// Each of the top min(k_s, n) items by relevance receives delta_t * P_j of
/// its ideal rank j. Feasible for every alpha; used as solver fallback.
ExposurePlan ideal_topk_plan(std::span<const double> relevance_est, const ExaminationCurve& curve,
                             std::size_t delta_t);

}  // namespace fara
