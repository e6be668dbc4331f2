#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fara/common.hpp"
#include "fara/user_model.hpp"

namespace fara {

/// delta_t ranklists realizing an exposure plan.
struct RanklistBuffer {
  std::vector<Ranklist> ranklists;
  /// Exposure each item receives across the buffer, sum of P_rank over its placements.
  std::vector<double> realized_exposure;
};

enum class FillOrder {
  vertical,    // rank-major: every session's rank 1, then every rank 2, ...
  horizontal,  // session-major: session 1 top to bottom, then session 2, ...
};

enum class Selection {
  most_relevant,
  least_relevant,
};

/// Slack around P_rank in the remaining-budget test, absorbing fp drift in
/// the accumulated exposure.
inline constexpr double kBudgetSlack = 1e-9;

/// Fills delta_t ranklists of length min(k_s, n). Each slot takes, among
/// items absent from its session, those whose remaining budget covers the
/// slot's examination probability; if none qualifies, any absent item.
/// Ties in relevance resolve to the lower canonical index.
RanklistBuffer allocate(std::span<const double> delta_e, std::size_t delta_t, const ExaminationCurve& curve,
                        std::span<const double> relevance_est, FillOrder order,
                        Selection selection = Selection::most_relevant);

inline RanklistBuffer vertical_allocate(std::span<const double> delta_e, std::size_t delta_t,
                                        const ExaminationCurve& curve, std::span<const double> relevance_est) {
  return allocate(delta_e, delta_t, curve, relevance_est, FillOrder::vertical);
}

inline RanklistBuffer horizontal_allocate(std::span<const double> delta_e, std::size_t delta_t,
                                          const ExaminationCurve& curve, std::span<const double> relevance_est) {
  return allocate(delta_e, delta_t, curve, relevance_est, FillOrder::horizontal);
}

struct AllocationResiduals {
  /// delta_e(d) - realized(d).
  std::vector<double> residuals;
  /// Items whose residual exceeds P_{k_s} (the deepest examined rank of the list).
  std::size_t violations = 0;
};

AllocationResiduals allocation_residuals(std::span<const double> delta_e, const RanklistBuffer& buffer,
                                         const ExaminationCurve& curve);

/// Sum of P_rank over each item's placements, computed from the ranklists.
std::vector<double> buffer_exposure(const RanklistBuffer& buffer, std::size_t n_items, const ExaminationCurve& curve,
                                    std::size_t k_c);

}  // namespace fara
