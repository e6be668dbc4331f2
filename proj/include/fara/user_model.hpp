#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fara/common.hpp"
#include "fara/rng.hpp"

namespace fara {

/// 1/log2(rank + 1) for rank <= k_s, zero below the cutoff. Ranks are 1-indexed.
double examination_prob(std::size_t rank, std::size_t k_s);

/// Examination probabilities P_1..P_{k_s}; zero for every deeper rank.
class ExaminationCurve {
 public:
  /// Log-discount curve truncated at k_s (k_s >= 1).
  explicit ExaminationCurve(std::size_t k_s);

  std::size_t k_s() const { return probs_.size(); }

  /// P_rank for a 1-indexed rank.
  double prob(std::size_t rank) const {
    return rank >= 1 && rank <= probs_.size() ? probs_[rank - 1] : 0.0;
  }
  std::span<const double> probs() const { return probs_; }

  /// Ranklist length used for a query with n candidates.
  std::size_t list_length(std::size_t n_items) const { return n_items < k_s() ? n_items : k_s(); }

  /// Sum of P_1..P_len.
  double prefix_mass(std::size_t len) const;

 private:
  std::vector<double> probs_;
};

struct RelevanceModel {
  double epsilon = 0.1;
  int y_max = 4;
};

/// epsilon + (1 - epsilon) (2^grade - 1) / (2^y_max - 1).
double relevance_prob(int grade, const RelevanceModel& model);

/// Per-rank clicks: rank i is clicked with probability P_i * R(item).
/// One uniform draw per rank, consumed in rank order.
std::vector<std::uint8_t> simulate_clicks(std::span<const ItemIndex> ranklist,
                                          std::span<const double> relevance_probs,
                                          const ExaminationCurve& curve, RandomStream& rng);

}  // namespace fara
