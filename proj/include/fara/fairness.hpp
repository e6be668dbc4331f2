#pragma once

#include <span>

#include <Eigen/Dense>

#include "fara/common.hpp"

namespace fara {

/// Exact second-order form of the change in fairness (negated pairwise
/// disparity) under an exposure increment:
///   delta_fair = G . dE - 1/2 dE' H dE
/// The disparity is a degree-two polynomial in exposure, so this is an
/// identity, not an approximation. H depends only on relevance and is PSD.
struct FairnessQuadratic {
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;

  Eigen::Index n() const { return gradient.size(); }
};

/// G(d) = c (R(d) sum_l E(l) R(l) - E(d) sum_h R(h)^2), c = 4 / (n (n - 1)).
/// O(n). Throws ValidationError for n < 2 or mismatched sizes.
Eigen::VectorXd fairness_gradient(std::span<const double> exposure, std::span<const double> relevance_est);

/// H(x, y) = c ((sum R^2) [x == y] - R(x) R(y)).
Eigen::MatrixXd fairness_hessian(std::span<const double> relevance_est);

FairnessQuadratic build_quadratic(std::span<const double> exposure, std::span<const double> relevance_est);

/// Evaluates G . dE - 1/2 dE' H dE. Throws ValidationError on size mismatch.
double marginal_fairness(const FairnessQuadratic& quad, std::span<const double> delta_e);

}  // namespace fara
