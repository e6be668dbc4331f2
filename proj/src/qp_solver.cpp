#include "fara/qp.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "fara/common.hpp"

namespace fara {

QpProblem QpProblem::unconstrained(Eigen::Index n_var) {
  QpProblem p;
  p.quadratic = Eigen::MatrixXd::Zero(n_var, n_var);
  p.linear = Eigen::VectorXd::Zero(n_var);
  p.equality_matrix.resize(0, n_var);
  p.equality_rhs.resize(0);
  p.inequality_matrix.resize(0, n_var);
  p.inequality_rhs.resize(0);
  p.lower_bounds = Eigen::VectorXd::Constant(n_var, -kUnbounded);
  p.upper_bounds = Eigen::VectorXd::Constant(n_var, kUnbounded);
  return p;
}

void QpProblem::validate() const {
  const Eigen::Index n = num_variables();
  auto fail = [](const std::string& what) { throw ValidationError("QpProblem: " + what); };
  if (quadratic.rows() != n || quadratic.cols() != n) fail("quadratic matrix must be n x n");
  if (equality_matrix.cols() != n || equality_matrix.rows() != equality_rhs.size()) fail("equality block dimensions");
  if (inequality_matrix.cols() != n || inequality_matrix.rows() != inequality_rhs.size()) {
    fail("inequality block dimensions");
  }
  if (lower_bounds.size() != n || upper_bounds.size() != n) fail("bound vectors must have length n");
  if (!quadratic.allFinite() || !linear.allFinite() || !equality_matrix.allFinite() ||
      !equality_rhs.allFinite() || !inequality_matrix.allFinite() || !inequality_rhs.allFinite()) {
    fail("non-finite data");
  }
  const double scale = std::max(1.0, quadratic.cwiseAbs().maxCoeff());
  if (n > 0 && (quadratic - quadratic.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    fail("quadratic matrix is not symmetric");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::isnan(lower_bounds[i]) || std::isnan(upper_bounds[i]) || lower_bounds[i] > upper_bounds[i] ||
        lower_bounds[i] == kUnbounded || upper_bounds[i] == -kUnbounded) {
      fail("inconsistent bounds for variable " + std::to_string(i));
    }
  }
}

double QpProblem::objective(const Eigen::VectorXd& x) const { return 0.5 * x.dot(quadratic * x) + linear.dot(x); }

Eigen::MatrixXd QpProblem::stacked_matrix() const {
  const Eigen::Index n = num_variables();
  Eigen::MatrixXd a(num_rows(), n);
  a << equality_matrix, inequality_matrix, Eigen::MatrixXd::Identity(n, n);
  return a;
}

Eigen::VectorXd QpProblem::stacked_lower() const {
  Eigen::VectorXd l(num_rows());
  l << equality_rhs, inequality_rhs, lower_bounds;
  return l;
}

Eigen::VectorXd QpProblem::stacked_upper() const {
  Eigen::VectorXd u(num_rows());
  u << equality_rhs, Eigen::VectorXd::Constant(inequality_rhs.size(), kUnbounded), upper_bounds;
  return u;
}

std::string_view to_string(QpStatus status) {
  switch (status) {
    case QpStatus::solved: return "solved";
    case QpStatus::primal_infeasible: return "primal_infeasible";
    case QpStatus::dual_infeasible: return "dual_infeasible";
    case QpStatus::max_iterations: return "max_iterations";
  }
  return "unknown";
}

namespace {

double inf_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

struct StackedData {
  Eigen::MatrixXd p;
  Eigen::VectorXd q;
  Eigen::MatrixXd a;
  Eigen::VectorXd l;
  Eigen::VectorXd u;
};

KktResiduals stacked_residuals(const StackedData& s, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  KktResiduals r;
  const Eigen::VectorXd ax = s.a * x;
  for (Eigen::Index i = 0; i < ax.size(); ++i) {
    const double below = s.l[i] - ax[i];
    const double above = ax[i] - s.u[i];
    r.primal = std::max({r.primal, below, above});
    double comp = 0.0;
    if (y[i] > 0.0) {
      comp = std::isinf(s.u[i]) ? y[i] : y[i] * std::abs(s.u[i] - ax[i]);
    } else if (y[i] < 0.0) {
      comp = std::isinf(s.l[i]) ? -y[i] : -y[i] * std::abs(ax[i] - s.l[i]);
    }
    r.complementarity = std::max(r.complementarity, comp);
  }
  r.dual = inf_norm(s.p * x + s.q + s.a.transpose() * y);
  return r;
}

/// Thresholds mirroring the ADMM stopping rule, evaluated at (x, y).
struct Tolerances {
  double primal;
  double dual;
};

Tolerances tolerances(const StackedData& s, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                      const QpSettings& settings) {
  const Eigen::VectorXd ax = s.a * x;
  double z_norm = 0.0;
  for (Eigen::Index i = 0; i < ax.size(); ++i) {
    z_norm = std::max(z_norm, std::abs(std::clamp(ax[i], s.l[i], s.u[i])));
  }
  const double prim = settings.eps_abs + settings.eps_rel * std::max(inf_norm(ax), z_norm);
  const double dual = settings.eps_abs + settings.eps_rel * std::max({inf_norm(s.p * x),
                                                                      inf_norm(s.a.transpose() * y), inf_norm(s.q)});
  return {prim, dual};
}

bool meets(const KktResiduals& r, const Tolerances& t) {
  return r.primal <= t.primal && r.dual <= t.dual && r.complementarity <= std::max(t.primal, t.dual);
}

struct Polished {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  KktResiduals residuals;
};

/// Solves the equality-constrained QP on the guessed active set with a
/// regularized KKT factorization plus iterative refinement.
std::optional<Polished> polish(const StackedData& s, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const Eigen::Index n = s.p.rows();
  const Eigen::Index m = s.a.rows();
  const Eigen::VectorXd z = s.a * x;

  std::vector<Eigen::Index> rows;
  std::vector<double> targets;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (s.l[i] == s.u[i]) {
      rows.push_back(i);
      targets.push_back(s.l[i]);
    } else if (!std::isinf(s.l[i]) && z[i] - s.l[i] < -y[i]) {
      rows.push_back(i);
      targets.push_back(s.l[i]);
    } else if (!std::isinf(s.u[i]) && s.u[i] - z[i] < y[i]) {
      rows.push_back(i);
      targets.push_back(s.u[i]);
    }
  }

  const auto k = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + k, n + k);
  kkt.topLeftCorner(n, n) = s.p;
  Eigen::VectorXd rhs(n + k);
  rhs.head(n) = -s.q;
  for (Eigen::Index r = 0; r < k; ++r) {
    kkt.block(n + r, 0, 1, n) = s.a.row(rows[static_cast<std::size_t>(r)]);
    kkt.block(0, n + r, n, 1) = s.a.row(rows[static_cast<std::size_t>(r)]).transpose();
    rhs[n + r] = targets[static_cast<std::size_t>(r)];
  }

  constexpr double kDelta = 1e-9;
  Eigen::MatrixXd regularized = kkt;
  regularized.topLeftCorner(n, n).diagonal().array() += kDelta;
  regularized.bottomRightCorner(k, k).diagonal().array() -= kDelta;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(regularized);

  Eigen::VectorXd sol = lu.solve(rhs);
  for (int it = 0; it < 10; ++it) {
    const Eigen::VectorXd residual = rhs - kkt * sol;
    if (inf_norm(residual) <= 1e-15 * std::max(1.0, inf_norm(rhs))) break;
    sol += lu.solve(residual);
  }
  if (!sol.allFinite()) return std::nullopt;

  Polished out;
  out.x = sol.head(n);
  out.y = Eigen::VectorXd::Zero(m);
  for (Eigen::Index r = 0; r < k; ++r) out.y[rows[static_cast<std::size_t>(r)]] = sol[n + r];
  out.residuals = stacked_residuals(s, out.x, out.y);
  return out;
}

class AdmmSolver {
 public:
  AdmmSolver(const QpProblem& problem, const QpSettings& settings) : settings_(settings) {
    original_.p = problem.quadratic;
    original_.q = problem.linear;
    original_.a = problem.stacked_matrix();
    original_.l = problem.stacked_lower();
    original_.u = problem.stacked_upper();
    n_ = original_.p.rows();
    m_ = original_.a.rows();
    equilibrate();
  }

  QpSolution run() {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n_);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(m_);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(m_);
    set_rho(settings_.rho);

    const double a = settings_.relaxation;
    int checks = 0;
    for (int iter = 1; iter <= settings_.max_iterations; ++iter) {
      const Eigen::VectorXd x_prev = x;
      const Eigen::VectorXd y_prev = y;

      const Eigen::VectorXd rhs = settings_.sigma * x - q_ + a_.transpose() * (rho_.cwiseProduct(z) - y);
      const Eigen::VectorXd x_tilde = factor_.solve(rhs);
      const Eigen::VectorXd z_tilde = a_ * x_tilde;
      x = a * x_tilde + (1.0 - a) * x;
      const Eigen::VectorXd w = a * z_tilde + (1.0 - a) * z;
      z = (w + y.cwiseQuotient(rho_)).cwiseMax(l_).cwiseMin(u_);
      y += rho_.cwiseProduct(w - z);

      if (iter % settings_.check_interval != 0 && iter != settings_.max_iterations) continue;
      ++checks;

      const Eigen::VectorXd x_unscaled = d_.cwiseProduct(x);
      const Eigen::VectorXd y_unscaled = e_.cwiseProduct(y) / cost_;
      const Eigen::VectorXd ax = a_ * x;
      const Eigen::VectorXd px = p_ * x;
      const Eigen::VectorXd aty = a_.transpose() * y;

      const double prim = inf_norm(e_inv_.cwiseProduct(ax - z));
      const double dual = inf_norm(d_inv_.cwiseProduct(px + q_ + aty)) / cost_;
      const double eps_prim = settings_.eps_abs + settings_.eps_rel * std::max(inf_norm(e_inv_.cwiseProduct(ax)),
                                                                               inf_norm(e_inv_.cwiseProduct(z)));
      const double eps_dual =
          settings_.eps_abs + settings_.eps_rel / cost_ *
                                  std::max({inf_norm(d_inv_.cwiseProduct(px)), inf_norm(d_inv_.cwiseProduct(aty)),
                                            inf_norm(d_inv_.cwiseProduct(q_))});

      if (prim <= eps_prim && dual <= eps_dual) {
        return finish(QpStatus::solved, x_unscaled, y_unscaled, iter);
      }

      // Active-set polish once the iterates have settled, and periodically
      // for degenerate problems where ADMM stalls.
      if (settings_.polish && ((prim <= 1e4 * eps_prim && dual <= 1e4 * eps_dual && checks % 2 == 0) || checks % settings_.polish_checks == 0)) {
        if (auto p = polish(original_, x_unscaled, y_unscaled);
            p && meets(p->residuals, tolerances(original_, p->x, p->y, settings_))) {
          return make_solution(QpStatus::solved, p->x, p->y, iter, true);
        }
      }

      if (primal_infeasible(y - y_prev)) return finish(QpStatus::primal_infeasible, x_unscaled, y_unscaled, iter);
      if (dual_infeasible(x - x_prev)) return finish(QpStatus::dual_infeasible, x_unscaled, y_unscaled, iter);

      if (checks % settings_.rho_update_checks == 0) adapt_rho(ax, z, px, aty);
    }
    return finish(QpStatus::max_iterations, d_.cwiseProduct(x), e_.cwiseProduct(y) / cost_,
                  settings_.max_iterations);
  }

 private:
  void equilibrate() {
    p_ = original_.p;
    q_ = original_.q;
    a_ = original_.a;
    d_ = Eigen::VectorXd::Ones(n_);
    e_ = Eigen::VectorXd::Ones(m_);
    auto clamp_norm = [](double v) { return v < 1e-4 ? 1.0 : std::min(v, 1e4); };

    for (int it = 0; it < settings_.scaling_iterations; ++it) {
      Eigen::VectorXd dt(n_);
      for (Eigen::Index j = 0; j < n_; ++j) {
        const double col = std::max(p_.col(j).cwiseAbs().maxCoeff(), a_.col(j).cwiseAbs().maxCoeff());
        dt[j] = 1.0 / std::sqrt(clamp_norm(col));
      }
      Eigen::VectorXd et(m_);
      for (Eigen::Index i = 0; i < m_; ++i) et[i] = 1.0 / std::sqrt(clamp_norm(a_.row(i).cwiseAbs().maxCoeff()));

      p_ = dt.asDiagonal() * p_ * dt.asDiagonal();
      a_ = et.asDiagonal() * a_ * dt.asDiagonal();
      q_ = dt.cwiseProduct(q_);
      d_ = d_.cwiseProduct(dt);
      e_ = e_.cwiseProduct(et);
    }

    double p_col_mean = 0.0;
    for (Eigen::Index j = 0; j < n_; ++j) p_col_mean += p_.col(j).cwiseAbs().maxCoeff();
    p_col_mean /= static_cast<double>(std::max<Eigen::Index>(n_, 1));
    const double cost_norm = std::max(p_col_mean, inf_norm(q_));
    cost_ = 1.0 / std::clamp(cost_norm < 1e-4 ? 1.0 : cost_norm, 1e-4, 1e4);
    p_ *= cost_;
    q_ *= cost_;

    l_ = e_.cwiseProduct(original_.l);
    u_ = e_.cwiseProduct(original_.u);
    d_inv_ = d_.cwiseInverse();
    e_inv_ = e_.cwiseInverse();
  }

  void set_rho(double rho) {
    rho_scalar_ = std::clamp(rho, 1e-6, 1e6);
    rho_.resize(m_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (std::isinf(original_.l[i]) && std::isinf(original_.u[i])) {
        rho_[i] = 1e-6;
      } else if (original_.l[i] == original_.u[i]) {
        rho_[i] = 1e3 * rho_scalar_;
      } else {
        rho_[i] = rho_scalar_;
      }
    }
    Eigen::MatrixXd k = p_ + a_.transpose() * rho_.asDiagonal() * a_;
    k.diagonal().array() += settings_.sigma;
    factor_.compute(k);
  }

  void adapt_rho(const Eigen::VectorXd& ax, const Eigen::VectorXd& z, const Eigen::VectorXd& px,
                 const Eigen::VectorXd& aty) {
    const double prim_s = inf_norm(ax - z);
    const double dual_s = inf_norm(px + q_ + aty);
    const double prim_den = std::max(inf_norm(ax), inf_norm(z)) + 1e-30;
    const double dual_den = std::max({inf_norm(px), inf_norm(aty), inf_norm(q_)}) + 1e-30;
    const double ratio = std::sqrt((prim_s / prim_den) / (dual_s / dual_den + 1e-30) + 1e-30);
    const double candidate = std::clamp(rho_scalar_ * ratio, 1e-6, 1e6);
    if (candidate > 5.0 * rho_scalar_ || candidate < 0.2 * rho_scalar_) set_rho(candidate);
  }

  bool primal_infeasible(const Eigen::VectorXd& dy) const {
    const double dy_norm = inf_norm(e_.cwiseProduct(dy));
    if (dy_norm <= 1e-12) return false;
    const double eps = settings_.eps_infeasible * dy_norm;
    if (inf_norm(d_inv_.cwiseProduct(a_.transpose() * dy)) > eps) return false;
    double support = 0.0;
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (dy[i] > 0.0) {
        if (std::isinf(u_[i])) {
          if (e_[i] * dy[i] > eps) return false;
        } else {
          support += u_[i] * dy[i];
        }
      } else if (dy[i] < 0.0) {
        if (std::isinf(l_[i])) {
          if (-e_[i] * dy[i] > eps) return false;
        } else {
          support += l_[i] * dy[i];
        }
      }
    }
    return support < -eps;
  }

  bool dual_infeasible(const Eigen::VectorXd& dx) const {
    const double dx_norm = inf_norm(d_.cwiseProduct(dx));
    if (dx_norm <= 1e-12) return false;
    const double eps = settings_.eps_infeasible * dx_norm;
    if (inf_norm(d_inv_.cwiseProduct(p_ * dx)) > cost_ * eps) return false;
    if (q_.dot(dx) > -cost_ * eps) return false;
    const Eigen::VectorXd adx = e_inv_.cwiseProduct(a_ * dx);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const bool lower_finite = !std::isinf(l_[i]);
      const bool upper_finite = !std::isinf(u_[i]);
      if (lower_finite && adx[i] < -eps) return false;
      if (upper_finite && adx[i] > eps) return false;
    }
    return true;
  }

  QpSolution finish(QpStatus status, const Eigen::VectorXd& x, const Eigen::VectorXd& y, int iter) const {
    if (status == QpStatus::solved && settings_.polish) {
      const KktResiduals raw = stacked_residuals(original_, x, y);
      const bool raw_ok = meets(raw, tolerances(original_, x, y, settings_));
      if (auto p = polish(original_, x, y);
          p && (meets(p->residuals, tolerances(original_, p->x, p->y, settings_)) ||
                (!raw_ok && p->residuals.max() < raw.max()))) {
        return make_solution(status, p->x, p->y, iter, true);
      }
    }
    return make_solution(status, x, y, iter, false);
  }

  QpSolution make_solution(QpStatus status, const Eigen::VectorXd& x, const Eigen::VectorXd& y, int iter,
                           bool polished) const {
    QpSolution s;
    s.status = status;
    s.x = x;
    s.duals = y;
    s.iterations = iter;
    s.polished = polished;
    s.objective = 0.5 * x.dot(original_.p * x) + original_.q.dot(x);
    s.residuals = stacked_residuals(original_, x, y);
    return s;
  }

  QpSettings settings_;
  StackedData original_;
  Eigen::Index n_ = 0;
  Eigen::Index m_ = 0;

  Eigen::MatrixXd p_;
  Eigen::VectorXd q_;
  Eigen::MatrixXd a_;
  Eigen::VectorXd l_, u_;
  Eigen::VectorXd d_, e_, d_inv_, e_inv_;
  double cost_ = 1.0;

  double rho_scalar_ = 0.1;
  Eigen::VectorXd rho_;
  Eigen::LLT<Eigen::MatrixXd> factor_;
};

}  // namespace

KktResiduals kkt_residuals(const QpProblem& problem, const Eigen::VectorXd& x, const Eigen::VectorXd& duals) {
  StackedData s{problem.quadratic, problem.linear, problem.stacked_matrix(), problem.stacked_lower(),
                problem.stacked_upper()};
  if (x.size() != problem.num_variables() || duals.size() != s.a.rows()) {
    throw ValidationError("kkt_residuals: dimension mismatch");
  }
  return stacked_residuals(s, x, duals);
}

QpSolution solve_qp(const QpProblem& problem, const QpSettings& settings) {
  problem.validate();
  return AdmmSolver(problem, settings).run();
}

}  // namespace fara
