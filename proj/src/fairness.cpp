#include "fara/fairness.hpp"

#include "fara/common.hpp"
#include "fara/numeric.hpp"

namespace fara {
namespace {

double pair_scale(std::size_t n) {
  if (n < 2) throw ValidationError("fairness needs at least two items");
  return 4.0 / (static_cast<double>(n) * static_cast<double>(n - 1));
}

}  // namespace

Eigen::VectorXd fairness_gradient(std::span<const double> exposure, std::span<const double> relevance_est) {
  if (exposure.size() != relevance_est.size()) throw ValidationError("exposure/relevance size mismatch");
  const std::size_t n = exposure.size();
  const double c = pair_scale(n);
  const double exposure_relevance = compensated_dot(exposure, relevance_est);
  const double relevance_sq = compensated_dot(relevance_est, relevance_est);

  Eigen::VectorXd g(static_cast<Eigen::Index>(n));
  for (std::size_t d = 0; d < n; ++d) {
    CompensatedSum term;
    term.add_product(relevance_est[d], exposure_relevance);
    term.add_product(-exposure[d], relevance_sq);
    g[static_cast<Eigen::Index>(d)] = c * term.value();
  }
  return g;
}

Eigen::MatrixXd fairness_hessian(std::span<const double> relevance_est) {
  const std::size_t n = relevance_est.size();
  const double c = pair_scale(n);
  const double relevance_sq = compensated_dot(relevance_est, relevance_est);
  const auto size = static_cast<Eigen::Index>(n);

  Eigen::MatrixXd h(size, size);
  for (Eigen::Index x = 0; x < size; ++x) {
    for (Eigen::Index y = 0; y < size; ++y) {
      CompensatedSum term;
      if (x == y) term.add(relevance_sq);
      term.add_product(-relevance_est[static_cast<std::size_t>(x)], relevance_est[static_cast<std::size_t>(y)]);
      h(x, y) = c * term.value();
    }
  }
  return h;
}

FairnessQuadratic build_quadratic(std::span<const double> exposure, std::span<const double> relevance_est) {
  return FairnessQuadratic{fairness_gradient(exposure, relevance_est), fairness_hessian(relevance_est)};
}

double marginal_fairness(const FairnessQuadratic& quad, std::span<const double> delta_e) {
  const auto n = quad.n();
  if (static_cast<Eigen::Index>(delta_e.size()) != n) throw ValidationError("delta_e has wrong dimension");
  CompensatedSum acc;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double di = delta_e[static_cast<std::size_t>(i)];
    acc.add_product(quad.gradient[i], di);
    CompensatedSum row;
    for (Eigen::Index j = 0; j < n; ++j) row.add_product(quad.hessian(i, j), delta_e[static_cast<std::size_t>(j)]);
    acc.add_product(-0.5 * di, row.value());
  }
  return acc.value();
}

}  // namespace fara
