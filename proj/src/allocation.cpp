#include "fara/allocation.hpp"

#include <cstdint>

namespace fara {

RanklistBuffer allocate(std::span<const double> delta_e, std::size_t delta_t, const ExaminationCurve& curve,
                        std::span<const double> relevance_est, FillOrder order, Selection selection) {
  const std::size_t n = delta_e.size();
  if (relevance_est.size() != n) throw ValidationError("plan and relevance sizes differ");
  const std::size_t len = curve.list_length(n);

  RanklistBuffer buffer;
  buffer.ranklists.assign(delta_t, Ranklist{});
  for (auto& list : buffer.ranklists) list.reserve(len);
  buffer.realized_exposure.assign(n, 0.0);
  // placed[sess * n + d] marks d as already in session sess.
  std::vector<std::uint8_t> placed(delta_t * n, 0);

  auto better = [&](ItemIndex candidate, ItemIndex incumbent) {
    return selection == Selection::most_relevant ? relevance_est[candidate] > relevance_est[incumbent]
                                                 : relevance_est[candidate] < relevance_est[incumbent];
  };

  auto fill = [&](std::size_t sess, std::size_t rank) {
    const double p = curve.prob(rank);
    const std::uint8_t* in_session = &placed[sess * n];
    constexpr ItemIndex kNone = static_cast<ItemIndex>(-1);
    ItemIndex funded = kNone;
    ItemIndex any = kNone;
    for (ItemIndex d = 0; d < n; ++d) {
      if (in_session[d]) continue;
      if (any == kNone || better(d, any)) any = d;
      if (delta_e[d] - buffer.realized_exposure[d] >= p - kBudgetSlack && (funded == kNone || better(d, funded))) {
        funded = d;
      }
    }
    const ItemIndex chosen = funded != kNone ? funded : any;
    buffer.ranklists[sess].push_back(chosen);
    placed[sess * n + chosen] = 1;
    buffer.realized_exposure[chosen] += p;
  };

  if (order == FillOrder::vertical) {
    for (std::size_t rank = 1; rank <= len; ++rank) {
      for (std::size_t sess = 0; sess < delta_t; ++sess) fill(sess, rank);
    }
  } else {
    for (std::size_t sess = 0; sess < delta_t; ++sess) {
      for (std::size_t rank = 1; rank <= len; ++rank) fill(sess, rank);
    }
  }
  return buffer;
}

AllocationResiduals allocation_residuals(std::span<const double> delta_e, const RanklistBuffer& buffer,
                                         const ExaminationCurve& curve) {
  AllocationResiduals out;
  out.residuals.resize(delta_e.size());
  const std::size_t len = curve.list_length(delta_e.size());
  const double bound = curve.prob(len);
  for (std::size_t d = 0; d < delta_e.size(); ++d) {
    out.residuals[d] = delta_e[d] - buffer.realized_exposure[d];
    if (out.residuals[d] > bound + kBudgetSlack) ++out.violations;
  }
  return out;
}

std::vector<double> buffer_exposure(const RanklistBuffer& buffer, std::size_t n_items, const ExaminationCurve& curve,
                                    std::size_t k_c) {
  std::vector<double> out(n_items, 0.0);
  for (const auto& list : buffer.ranklists) {
    for (std::size_t i = 0; i < list.size() && i < k_c; ++i) out[list[i]] += curve.prob(i + 1);
  }
  return out;
}

}  // namespace fara
