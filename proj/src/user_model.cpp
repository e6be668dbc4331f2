#include "fara/user_model.hpp"

#include <cmath>
#include <string>

namespace fara {

double examination_prob(std::size_t rank, std::size_t k_s) {
  if (rank < 1 || rank > k_s) return 0.0;
  return 1.0 / std::log2(static_cast<double>(rank) + 1.0);
}

ExaminationCurve::ExaminationCurve(std::size_t k_s) {
  if (k_s < 1) throw ValidationError("k_s must be at least 1");
  probs_.reserve(k_s);
  for (std::size_t r = 1; r <= k_s; ++r) probs_.push_back(examination_prob(r, k_s));
}

double ExaminationCurve::prefix_mass(std::size_t len) const {
  double total = 0.0;
  for (std::size_t r = 1; r <= len && r <= k_s(); ++r) total += probs_[r - 1];
  return total;
}

double relevance_prob(int grade, const RelevanceModel& model) {
  if (model.y_max < 1) throw ValidationError("y_max must be at least 1");
  if (grade < 0 || grade > model.y_max) {
    throw ValidationError("grade " + std::to_string(grade) + " outside [0, " +
                          std::to_string(model.y_max) + "]");
  }
  if (!(model.epsilon >= 0.0 && model.epsilon < 1.0)) {
    throw ValidationError("epsilon must lie in [0, 1)");
  }
  const double gain = std::exp2(grade) - 1.0;
  const double max_gain = std::exp2(model.y_max) - 1.0;
  return model.epsilon + (1.0 - model.epsilon) * gain / max_gain;
}

std::vector<std::uint8_t> simulate_clicks(std::span<const ItemIndex> ranklist,
                                          std::span<const double> relevance_probs,
                                          const ExaminationCurve& curve, RandomStream& rng) {
  std::vector<std::uint8_t> clicks(ranklist.size(), 0);
  for (std::size_t i = 0; i < ranklist.size(); ++i) {
    const double p = curve.prob(i + 1) * relevance_probs[ranklist[i]];
    clicks[i] = rng.uniform01() < p ? 1 : 0;
  }
  return clicks;
}

}  // namespace fara
