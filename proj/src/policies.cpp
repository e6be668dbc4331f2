#include "fara/policies.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>
#include <string>

#include "fara/allocation.hpp"
#include "fara/fairness.hpp"

namespace fara {

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::fara: return "fara";
    case PolicyKind::fara_horiz: return "fara-horiz";
    case PolicyKind::topk: return "topk";
    case PolicyKind::randomk: return "randomk";
    case PolicyKind::fairco: return "fairco";
    case PolicyKind::mcfair: return "mcfair";
  }
  return "unknown";
}

PolicyKind policy_from_string(std::string_view text) {
  for (PolicyKind k : {PolicyKind::fara, PolicyKind::fara_horiz, PolicyKind::topk, PolicyKind::randomk,
                       PolicyKind::fairco, PolicyKind::mcfair}) {
    if (text == to_string(k)) return k;
  }
  if (text == "fara_horiz") return PolicyKind::fara_horiz;
  throw ValidationError("unknown policy '" + std::string(text) + "'");
}

std::string_view to_string(Setting setting) { return setting == Setting::online ? "online" : "post"; }

Setting setting_from_string(std::string_view text) {
  if (text == "post" || text == "post_processing" || text == "post-processing") return Setting::post_processing;
  if (text == "online") return Setting::online;
  throw ValidationError("unknown setting '" + std::string(text) + "'");
}

PolicyConfig PolicyConfig::normalized() const {
  PolicyConfig out = *this;
  const bool planner_kind = kind == PolicyKind::fara || kind == PolicyKind::fara_horiz;
  if (!(alpha >= 0.0)) throw ValidationError("alpha must be non-negative");
  if (planner_kind && alpha > 1.0) throw ValidationError("alpha must lie in [0, 1] for FARA policies");
  if (planner_kind) out.planner.alpha = alpha;
  out.planner.mode = setting == Setting::online ? PlanningMode::online : PlanningMode::post_processing;
  out.planner.validate();
  return out;
}

QueryState::QueryState(std::vector<double> relevance, std::size_t k_s)
    : ledger(relevance.size(), k_s), relevance_est(relevance.size(), 0.0), true_relevance(std::move(relevance)) {}

double estimate_relevance(const ExposureLedger& ledger, ItemIndex item) {
  const double e = ledger.exposure(item);
  return e > 0.0 ? static_cast<double>(ledger.clicks(item)) / e : 0.0;
}

void observe_session(QueryState& state, std::span<const ItemIndex> ranklist, std::span<const std::uint8_t> clicks,
                     const ExaminationCurve& curve) {
  state.ledger.record_session(ranklist, clicks, curve);
  for (ItemIndex d : ranklist) state.relevance_est[d] = estimate_relevance(state.ledger, d);
}

std::span<const double> ranking_relevance(const QueryState& state, Setting setting) {
  return setting == Setting::online ? std::span<const double>(state.relevance_est)
                                    : std::span<const double>(state.true_relevance);
}

Ranklist rank_by_score(std::span<const double> scores, const ExaminationCurve& curve) {
  Ranklist order(scores.size());
  std::iota(order.begin(), order.end(), ItemIndex{0});
  const std::size_t len = curve.list_length(scores.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(len), order.end(),
                    [&](ItemIndex a, ItemIndex b) { return scores[a] > scores[b] || (scores[a] == scores[b] && a < b); });
  order.resize(len);
  return order;
}

Ranklist fara_next(QueryState& state, const PolicyConfig& config, const ExaminationCurve& curve, RandomStream& rng) {
  if (state.buffer.empty()) {
    const auto relevance = ranking_relevance(state, config.setting);
    const std::size_t delta_t = config.planner.delta_t;
    ExposurePlan plan;
    if (state.n_items() < 2) {
      plan = ideal_topk_plan(relevance, curve, delta_t);
    } else {
      try {
        plan = solve_plan(build_planning_qp(state.ledger, relevance, curve, config.planner));
      } catch (const SolverError& e) {
        ++state.solver_fallbacks;
        std::clog << "warning: " << e.what() << "; serving the ideal TopK plan\n";
        plan = ideal_topk_plan(relevance, curve, delta_t);
      }
    }
    const FillOrder order = config.kind == PolicyKind::fara_horiz ? FillOrder::horizontal : FillOrder::vertical;
    RanklistBuffer built = allocate(plan.delta_e, delta_t, curve, relevance, order);
    rng.shuffle(std::span<Ranklist>(built.ranklists));
    state.buffer.assign(std::make_move_iterator(built.ranklists.begin()),
                        std::make_move_iterator(built.ranklists.end()));
    state.last_buffer_exposure = std::move(built.realized_exposure);
    ++state.plans_built;
  }
  Ranklist out = std::move(state.buffer.front());
  state.buffer.pop_front();
  return out;
}

Ranklist topk_next(const QueryState& state, const PolicyConfig& config, const ExaminationCurve& curve) {
  return rank_by_score(ranking_relevance(state, config.setting), curve);
}

Ranklist randomk_next(const QueryState& state, const ExaminationCurve& curve, RandomStream& rng) {
  Ranklist order(state.n_items());
  std::iota(order.begin(), order.end(), ItemIndex{0});
  const std::size_t len = curve.list_length(order.size());
  // Partial Fisher-Yates: the first len slots are a uniform random prefix.
  for (std::size_t i = 0; i < len; ++i) {
    std::swap(order[i], order[i + rng.uniform_index(order.size() - i)]);
  }
  order.resize(len);
  return order;
}

Ranklist fairco_next(const QueryState& state, const PolicyConfig& config, const ExaminationCurve& curve) {
  const auto relevance = ranking_relevance(state, config.setting);
  const std::size_t n = state.n_items();
  const std::vector<double> exposure = state.ledger.exposures();
  std::vector<double> scores(relevance.begin(), relevance.end());
  if (config.alpha > 0.0) {
    for (std::size_t d = 0; d < n; ++d) {
      double err = 0.0;
      for (std::size_t other = 0; other < n; ++other) {
        err = std::max(err, exposure[other] * relevance[d] - exposure[d] * relevance[other]);
      }
      scores[d] += config.alpha * err;
    }
  }
  return rank_by_score(scores, curve);
}

Ranklist mcfair_next(const QueryState& state, const PolicyConfig& config, const ExaminationCurve& curve) {
  const auto relevance = ranking_relevance(state, config.setting);
  std::vector<double> scores(relevance.begin(), relevance.end());
  if (config.alpha > 0.0 && state.n_items() >= 2) {
    const Eigen::VectorXd g = fairness_gradient(state.ledger.exposures(), relevance);
    for (std::size_t d = 0; d < scores.size(); ++d) scores[d] += config.alpha * g[static_cast<Eigen::Index>(d)];
  }
  return rank_by_score(scores, curve);
}

Ranklist next_ranklist(QueryState& state, const PolicyConfig& config, const ExaminationCurve& curve,
                       RandomStream& rng) {
  switch (config.kind) {
    case PolicyKind::fara:
    case PolicyKind::fara_horiz: return fara_next(state, config, curve, rng);
    case PolicyKind::topk: return topk_next(state, config, curve);
    case PolicyKind::randomk: return randomk_next(state, curve, rng);
    case PolicyKind::fairco: return fairco_next(state, config, curve);
    case PolicyKind::mcfair: return mcfair_next(state, config, curve);
  }
  throw ValidationError("unknown policy kind");
}

}  // namespace fara
