#pragma once

#include <limits>
#include <string_view>

#include <Eigen/Dense>

#include "fara/common.hpp"

namespace fara {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// Convex QP in canonical minimization form:
///
///   minimize    1/2 x' P x + q' x
///   subject to  A_eq x  = b_eq
///               A_ge x >= b_ge
///               lower <= x <= upper      (upper may be +inf)
///
/// Solvers see the stacked form l <= A x <= u with rows ordered
/// [equality; inequality; bounds].
struct QpProblem {
  Eigen::MatrixXd quadratic;
  Eigen::VectorXd linear;
  Eigen::MatrixXd equality_matrix;
  Eigen::VectorXd equality_rhs;
  Eigen::MatrixXd inequality_matrix;
  Eigen::VectorXd inequality_rhs;
  Eigen::VectorXd lower_bounds;
  Eigen::VectorXd upper_bounds;

  /// Zero objective, no constraint rows, free bounds.
  static QpProblem unconstrained(Eigen::Index n_var);

  Eigen::Index num_variables() const { return linear.size(); }
  Eigen::Index num_rows() const {
    return equality_matrix.rows() + inequality_matrix.rows() + num_variables();
  }

  /// Checks dimensions, finiteness and symmetry. Throws ValidationError.
  void validate() const;
  double objective(const Eigen::VectorXd& x) const;

  Eigen::MatrixXd stacked_matrix() const;
  Eigen::VectorXd stacked_lower() const;
  Eigen::VectorXd stacked_upper() const;
};

enum class QpStatus { solved, primal_infeasible, dual_infeasible, max_iterations };

std::string_view to_string(QpStatus status);

struct QpSettings {
  int max_iterations = 50000;
  double eps_abs = 1e-8;
  double eps_rel = 1e-8;
  double eps_infeasible = 1e-7;
  double rho = 0.1;
  double sigma = 1e-6;
  double relaxation = 1.6;
  int scaling_iterations = 10;
  int check_interval = 25;
  /// Convergence checks between step-size updates.
  int rho_update_checks = 8;
  /// Convergence checks between unconditional polish attempts.
  int polish_checks = 8;
  bool polish = true;
};

/// Infinity-norm optimality residuals in the problem's own units.
struct KktResiduals {
  double primal = 0.0;
  double dual = 0.0;
  double complementarity = 0.0;

  double max() const {
    return primal > dual ? (primal > complementarity ? primal : complementarity)
                         : (dual > complementarity ? dual : complementarity);
  }
};

struct QpSolution {
  QpStatus status = QpStatus::max_iterations;
  Eigen::VectorXd x;
  /// Stacked-row multipliers: positive when the upper side binds, negative
  /// when the lower side binds.
  Eigen::VectorXd duals;
  double objective = 0.0;
  int iterations = 0;
  bool polished = false;
  KktResiduals residuals;

  bool ok() const { return status == QpStatus::solved; }
};

/// Residuals of stationarity P x + q + A' y = 0, feasibility and
/// complementary slackness for a candidate primal/dual pair.
KktResiduals kkt_residuals(const QpProblem& problem, const Eigen::VectorXd& x, const Eigen::VectorXd& duals);

/// Operator-splitting (ADMM) solve with Ruiz equilibration, adaptive step
/// size and active-set polishing. Never throws for infeasible input; the
/// status says what happened and x is only meaningful when ok().
QpSolution solve_qp(const QpProblem& problem, const QpSettings& settings = {});

}  // namespace fara
