#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fara/common.hpp"
#include "fara/user_model.hpp"

namespace fara {

/// Per-item cumulative exposure at every cutoff 1..k_s plus click counts
/// for a single query.
class ExposureLedger {
 public:
  ExposureLedger() = default;
  ExposureLedger(std::size_t n_items, std::size_t k_s);

  std::size_t n_items() const { return clicks_.size(); }
  std::size_t k_s() const { return k_s_; }
  std::size_t sessions_served() const { return sessions_; }

  /// E^t@k_c(d), 1 <= k_c <= k_s.
  double exposure_at(ItemIndex item, std::size_t k_c) const { return exposure_[item * k_s_ + k_c - 1]; }
  /// E^t(d) = E^t@k_s(d).
  double exposure(ItemIndex item) const { return exposure_at(item, k_s_); }
  std::vector<double> exposures_at(std::size_t k_c) const;
  std::vector<double> exposures() const { return exposures_at(k_s_); }

  std::uint64_t clicks(ItemIndex item) const { return clicks_[item]; }

  /// Credits P_j to every cutoff >= j for the item at rank j and adds clicks.
  /// Throws InvariantError for duplicate or out-of-range items.
  void record_session(std::span<const ItemIndex> ranklist, std::span<const std::uint8_t> clicks,
                      const ExaminationCurve& curve);

 private:
  std::size_t k_s_ = 0;
  std::size_t sessions_ = 0;
  std::vector<double> exposure_;  // n_items x k_s, row-major
  std::vector<std::uint64_t> clicks_;
};

struct MetricConfig {
  double gamma = 0.995;
  std::vector<std::size_t> cutoffs{1, 3, 5};
  std::size_t k_s = 5;

  void validate() const;
};

/// sum_{i <= k_c} R(ranklist[i]) P_i over the available prefix.
double dcg_at(std::span<const ItemIndex> ranklist, std::span<const double> relevance, std::size_t k_c,
              const ExaminationCurve& curve);

/// DCG@k_c of the items sorted by descending relevance (stable in item order).
double ideal_dcg(std::span<const double> relevance, std::size_t k_c, const ExaminationCurve& curve);

/// gamma * state + dcg / ideal. Throws ValidationError when ideal <= 0.
double cum_ndcg_update(double state, double dcg, double ideal, double gamma);

/// Mean squared pairwise exposure disparity over ordered pairs; 0 for n < 2.
double unfairness(std::span<const double> exposure, std::span<const double> relevance);

inline double fairness(std::span<const double> exposure, std::span<const double> relevance) {
  return -unfairness(exposure, relevance);
}

/// sum_d R(d) E^t@k_c(d) / (t * ideal).
double aver_ndcg_from_exposure(std::span<const double> exposure, std::span<const double> relevance,
                               double ideal, std::size_t sessions);

}  // namespace fara
