#pragma once

#include <cstddef>
#include <deque>
#include <span>
#include <string_view>
#include <vector>

#include "fara/common.hpp"
#include "fara/metrics.hpp"
#include "fara/planner.hpp"
#include "fara/rng.hpp"
#include "fara/user_model.hpp"

namespace fara {

enum class PolicyKind { fara, fara_horiz, topk, randomk, fairco, mcfair };

std::string_view to_string(PolicyKind kind);
PolicyKind policy_from_string(std::string_view text);

/// post_processing: policies rank by the true relevance R.
/// online: policies rank by the click-based estimate only.
enum class Setting { post_processing, online };

std::string_view to_string(Setting setting);
Setting setting_from_string(std::string_view text);

struct PolicyConfig {
  PolicyKind kind = PolicyKind::fara;
  /// Tradeoff: [0, 1] for the planners, [0, inf) for FairCo and MCFair.
  double alpha = 1.0;
  PlannerConfig planner;
  Setting setting = Setting::post_processing;

  /// Checks ranges and aligns planner.alpha / planner.mode with this config.
  PolicyConfig normalized() const;
};

/// Serving state for one query, owned by a single simulation worker.
struct QueryState {
  QueryState(std::vector<double> true_relevance, std::size_t k_s);

  std::size_t n_items() const { return true_relevance.size(); }

  ExposureLedger ledger;
  /// Precomputed ranklists awaiting service (planning policies only).
  std::deque<Ranklist> buffer;
  /// Click-based estimate, refreshed for items shown in each session.
  std::vector<double> relevance_est;
  std::vector<double> true_relevance;
  std::size_t solver_fallbacks = 0;
  std::size_t plans_built = 0;
  /// Realized exposure of the most recent plan's buffer.
  std::vector<double> last_buffer_exposure;
};

/// cumC(d) / E(d), or 0 when the item has no exposure yet.
double estimate_relevance(const ExposureLedger& ledger, ItemIndex item);

/// Records a served session and refreshes the estimate of every shown item.
void observe_session(QueryState& state, std::span<const ItemIndex> ranklist, std::span<const std::uint8_t> clicks,
                     const ExaminationCurve& curve);

/// R in post-processing, the estimate online.
std::span<const double> ranking_relevance(const QueryState& state, Setting setting);

/// Pops the next buffered ranklist, replanning and reallocating when the
/// buffer is empty. Solver failure falls back to the ideal-TopK plan.
Ranklist fara_next(QueryState& state, const PolicyConfig& config, const ExaminationCurve& curve, RandomStream& rng);

Ranklist topk_next(const QueryState& state, const PolicyConfig& config, const ExaminationCurve& curve);
Ranklist randomk_next(const QueryState& state, const ExaminationCurve& curve, RandomStream& rng);

/// Proportional controller on pairwise disparity:
/// score(d) = R(d) + alpha * max(0, max_d' [E(d') R(d) - E(d) R(d')]).
Ranklist fairco_next(const QueryState& state, const PolicyConfig& config, const ExaminationCurve& curve);

/// Gradient-scored ranking: score(d) = R(d) + alpha * G(d).
Ranklist mcfair_next(const QueryState& state, const PolicyConfig& config, const ExaminationCurve& curve);

/// Dispatch on config.kind. config must already be normalized().
Ranklist next_ranklist(QueryState& state, const PolicyConfig& config, const ExaminationCurve& curve,
                       RandomStream& rng);

/// Indices sorted by descending score (stable), truncated to min(k_s, n).
Ranklist rank_by_score(std::span<const double> scores, const ExaminationCurve& curve);

}  // namespace fara
