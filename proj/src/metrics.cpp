#include "fara/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "fara/numeric.hpp"

namespace fara {

ExposureLedger::ExposureLedger(std::size_t n_items, std::size_t k_s)
    : k_s_(k_s), exposure_(n_items * k_s, 0.0), clicks_(n_items, 0) {
  if (k_s < 1) throw ValidationError("ledger needs k_s >= 1");
}

std::vector<double> ExposureLedger::exposures_at(std::size_t k_c) const {
  std::vector<double> out(n_items());
  for (std::size_t d = 0; d < out.size(); ++d) out[d] = exposure_at(d, k_c);
  return out;
}

void ExposureLedger::record_session(std::span<const ItemIndex> ranklist, std::span<const std::uint8_t> clicks,
                                    const ExaminationCurve& curve) {
  if (clicks.size() != ranklist.size()) throw InvariantError("click vector length differs from ranklist");
  for (std::size_t i = 0; i < ranklist.size(); ++i) {
    if (ranklist[i] >= n_items()) throw InvariantError("ranklist item out of range");
    for (std::size_t j = 0; j < i; ++j) {
      if (ranklist[j] == ranklist[i]) {
        throw InvariantError("duplicate item " + std::to_string(ranklist[i]) + " in ranklist");
      }
    }
  }
  for (std::size_t i = 0; i < ranklist.size() && i < k_s_; ++i) {
    const double p = curve.prob(i + 1);
    double* row = &exposure_[ranklist[i] * k_s_];
    for (std::size_t k = i; k < k_s_; ++k) row[k] += p;
  }
  for (std::size_t i = 0; i < ranklist.size(); ++i) clicks_[ranklist[i]] += clicks[i];
  ++sessions_;
}

void MetricConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ValidationError("gamma must lie in [0, 1]");
  if (k_s < 1) throw ValidationError("k_s must be at least 1");
  for (std::size_t k : cutoffs) {
    if (k < 1 || k > k_s) throw ValidationError("cutoff " + std::to_string(k) + " outside [1, k_s]");
  }
}

double dcg_at(std::span<const ItemIndex> ranklist, std::span<const double> relevance, std::size_t k_c,
              const ExaminationCurve& curve) {
  double total = 0.0;
  for (std::size_t i = 0; i < ranklist.size() && i < k_c; ++i) {
    total += relevance[ranklist[i]] * curve.prob(i + 1);
  }
  return total;
}

double ideal_dcg(std::span<const double> relevance, std::size_t k_c, const ExaminationCurve& curve) {
  std::vector<ItemIndex> order(relevance.size());
  std::iota(order.begin(), order.end(), ItemIndex{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](ItemIndex a, ItemIndex b) { return relevance[a] > relevance[b]; });
  return dcg_at(order, relevance, k_c, curve);
}

double cum_ndcg_update(double state, double dcg, double ideal, double gamma) {
  if (!(ideal > 0.0)) throw ValidationError("ideal DCG must be positive");
  return gamma * state + dcg / ideal;
}

double unfairness(std::span<const double> exposure, std::span<const double> relevance) {
  const std::size_t n = exposure.size();
  if (n < 2) return 0.0;
  CompensatedSum acc;
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      if (x == y) continue;
      const double diff = exposure[x] * relevance[y] - exposure[y] * relevance[x];
      acc.add(diff * diff);
    }
  }
  return acc.value() / (static_cast<double>(n) * static_cast<double>(n - 1));
}

double aver_ndcg_from_exposure(std::span<const double> exposure, std::span<const double> relevance,
                               double ideal, std::size_t sessions) {
  if (sessions < 1) throw ValidationError("aver-NDCG needs at least one session");
  if (!(ideal > 0.0)) throw ValidationError("ideal DCG must be positive");
  return compensated_dot(relevance, exposure) / (static_cast<double>(sessions) * ideal);
}

}  // namespace fara
