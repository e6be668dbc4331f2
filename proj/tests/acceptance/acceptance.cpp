// Acceptance gate: prints one PASS/FAIL line per criterion.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "../support/allocation_oracle.hpp"
#include "../support/qp_oracle.hpp"
#include "fara/allocation.hpp"
#include "fara/fairness.hpp"
#include "fara/harness.hpp"
#include "fara/metrics.hpp"
#include "fara/qp.hpp"

using namespace fara;
using fara::testing::max_residual;
using fara::testing::random_buffer;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// Direct double-sum disparity in extended precision.
long double disparity(const std::vector<double>& e, const std::vector<double>& r) {
  const std::size_t n = e.size();
  long double sum = 0;
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      const long double d = static_cast<long double>(e[x]) * r[y] - static_cast<long double>(e[y]) * r[x];
      sum += d * d;
    }
  }
  return sum / (static_cast<long double>(n) * (n - 1));
}

long double fairness_oracle(const std::vector<double>& e, const std::vector<double>& r) { return -disparity(e, r); }

Outcome taylor_exactness() {
  const auto start = Clock::now();
  RandomStream rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(9);
    std::vector<double> e(n), r(n), de(n), after(n);
    for (std::size_t i = 0; i < n; ++i) {
      e[i] = 100.0 * rng.uniform01();
      r[i] = rng.uniform01();
      de[i] = 50.0 * rng.uniform01();
      after[i] = e[i] + de[i];
    }
    const double direct = static_cast<double>(fairness_oracle(after, r) - fairness_oracle(e, r));
    const double taylor = marginal_fairness(build_quadratic(e, r), de);
    worst = std::max(worst, std::abs(taylor - direct) / std::max(1.0, std::abs(direct)));
  }
  const double t = seconds_since(start);
  return {worst <= 1e-9 && t < 5.0, fmt("1000 instances, worst scaled error %.3g (tol 1e-9), %.2fs (limit 5s)", worst, t)};
}

Outcome gradient_hessian() {
  const auto start = Clock::now();
  RandomStream rng(202);
  double worst_grad = 0.0, worst_eig = 0.0, worst_asym = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(14);
    std::vector<double> e(n), r(n);
    for (std::size_t i = 0; i < n; ++i) {
      e[i] = 10.0 * rng.uniform01();
      r[i] = rng.uniform01();
    }
    const auto g = fairness_gradient(e, r);
    const double h = 1e-3;
    for (std::size_t d = 0; d < n; ++d) {
      auto up = e, down = e;
      up[d] += h;
      down[d] -= h;
      const double fd = static_cast<double>((fairness_oracle(up, r) - fairness_oracle(down, r)) / (2 * h));
      worst_grad = std::max(worst_grad, std::abs(fd - g[static_cast<Eigen::Index>(d)]));
    }
    const auto hess = fairness_hessian(r);
    worst_asym = std::max(worst_asym, (hess - hess.transpose()).cwiseAbs().maxCoeff());
    worst_eig = std::min(worst_eig, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(hess).eigenvalues().minCoeff());
  }
  const double t = seconds_since(start);
  return {worst_grad <= 1e-6 && worst_asym == 0.0 && worst_eig >= -1e-9 && t < 10.0,
          fmt("200 instances, max |G - FD| %.3g (tol 1e-6), asymmetry %.3g, min eigenvalue %.3g (tol -1e-9), %.2fs",
              worst_grad, worst_asym, worst_eig, t)};
}

std::vector<double> random_feasible_plan(RandomStream& rng, std::size_t n, const ExaminationCurve& curve,
                                         std::size_t delta_t) {
  const double total = static_cast<double>(delta_t) * curve.prefix_mass(curve.list_length(n));
  const double cap = static_cast<double>(delta_t) * curve.prob(1);
  std::vector<double> x(n);
  for (double& v : x) v = std::pow(rng.uniform01(), 3.0);
  std::vector<bool> fixed(n, false);
  while (true) {
    double free_sum = 0, fixed_sum = 0;
    for (std::size_t i = 0; i < n; ++i) (fixed[i] ? fixed_sum : free_sum) += x[i];
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (fixed[i]) continue;
      x[i] *= (total - fixed_sum) / free_sum;
      if (x[i] > cap) {
        x[i] = cap;
        fixed[i] = true;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return x;
}

Outcome residual_bound() {
  const auto start = Clock::now();
  RandomStream rng(303);
  std::size_t worst_violations = 0, bound_failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k_s = 1 + rng.uniform_index(5);
    const ExaminationCurve curve(k_s);
    const std::size_t n = 1 + rng.uniform_index(30);
    const std::size_t delta_t = 1 + rng.uniform_index(10);
    std::vector<double> r(n);
    for (double& v : r) v = rng.uniform01();
    const auto plan = random_feasible_plan(rng, n, curve, delta_t);
    const auto res = allocation_residuals(plan, vertical_allocate(plan, delta_t, curve, r), curve);
    worst_violations = std::max(worst_violations, res.violations);
    bound_failures += res.violations > k_s ? 1 : 0;
  }
  std::size_t inexact = 0;
  double worst_residual = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k_s = 1 + rng.uniform_index(5);
    const ExaminationCurve curve(k_s);
    const std::size_t n = 1 + rng.uniform_index(30);
    const std::size_t delta_t = 1 + rng.uniform_index(10);
    std::vector<double> r(n);
    for (double& v : r) v = rng.uniform01();
    const auto source = random_buffer(rng, n, curve, delta_t);
    const auto rebuilt = vertical_allocate(source.realized_exposure, delta_t, curve, r);
    const double m = max_residual(source.realized_exposure, rebuilt.realized_exposure);
    worst_residual = std::max(worst_residual, m);
    inexact += m > 1e-9 ? 1 : 0;
  }
  const double t = seconds_since(start);
  return {bound_failures == 0 && inexact == 0 && t < 30.0,
          fmt("bound: %zu/1000 plans exceed k_s violators (max violators %zu); round trip: %zu/1000 realizable plans "
              "not reproduced exactly (max residual %.3g); %.2fs",
              bound_failures, worst_violations, inexact, worst_residual, t)};
}

struct EnumerationStats {
  std::size_t instances = 0;
  std::size_t vertical_inexact = 0;
  std::size_t vertical_suboptimal = 0;
  std::size_t exact_subset = 0;
  std::size_t theorem4_checks = 0;
  std::size_t theorem4_failures = 0;
  double theorem4_worst = 0.0;
  double seconds = 0.0;
};

const EnumerationStats& enumeration_stats() {
  static const EnumerationStats stats = [] {
    EnumerationStats s;
    const auto start = Clock::now();
    RandomStream rng(404);
    for (std::size_t k_s = 1; k_s <= 3; ++k_s) {
      const ExaminationCurve curve(k_s);
      for (std::size_t n = 1; n <= 6; ++n) {
        for (std::size_t delta_t = 1; delta_t <= 3; ++delta_t) {
          const fara::testing::RealizationIndex index(n, curve, delta_t);
          index.for_each_plan([&](const std::vector<double>& plan,
                                  const std::vector<fara::testing::PlacementCounts>& realizations) {
            std::vector<double> r(n);
            for (double& v : r) v = rng.uniform01();
            std::vector<double> history(n);
            for (double& v : history) v = 5.0 * rng.uniform01();
            ++s.instances;

            const auto vertical = vertical_allocate(plan, delta_t, curve, r);
            if (max_residual(plan, vertical.realized_exposure) > 1e-9) {
              ++s.vertical_inexact;
            } else {
              ++s.exact_subset;
              for (std::size_t k = 1; k <= k_s; ++k) {
                double best = -1.0;
                for (const auto& counts : realizations) best = std::max(best, index.weighted_exposure(counts, r, k));
                const auto e = fara::testing::exposure_at(vertical.ranklists, n, curve, k);
                double got = 0.0;
                for (std::size_t d = 0; d < n; ++d) got += r[d] * e[d];
                if (got < best - 1e-9) {
                  ++s.vertical_suboptimal;
                  break;
                }
              }
            }

            // Buffers realizing the same plan must agree with the plan itself on
            // unfairness and aver-NDCG@k_s.
            const double ideal = ideal_dcg(r, k_s, curve);
            auto measure = [&](const std::vector<double>& e) {
              std::vector<double> total(n);
              for (std::size_t d = 0; d < n; ++d) total[d] = history[d] + e[d];
              const double unfair = n >= 2 ? static_cast<double>(disparity(total, r)) : 0.0;
              const double aver = ideal > 0 ? aver_ndcg_from_exposure(e, r, ideal, delta_t) : 0.0;
              return std::pair{unfair, aver};
            };
            const auto ref = measure(plan);
            for (auto [order, sel] : {std::pair{FillOrder::vertical, Selection::most_relevant},
                                      std::pair{FillOrder::horizontal, Selection::most_relevant},
                                      std::pair{FillOrder::vertical, Selection::least_relevant}}) {
              const auto b = allocate(plan, delta_t, curve, r, order, sel);
              if (max_residual(plan, b.realized_exposure) > 1e-9) continue;
              const auto got = measure(fara::testing::exposure_at(b.ranklists, n, curve, k_s));
              const double diff = std::max(std::abs(got.first - ref.first), std::abs(got.second - ref.second));
              s.theorem4_worst = std::max(s.theorem4_worst, diff);
              ++s.theorem4_checks;
              s.theorem4_failures += diff > 1e-10 ? 1 : 0;
            }
          });
        }
      }
    }
    s.seconds = seconds_since(start);
    return s;
  }();
  return stats;
}

Outcome vertical_optimality() {
  const auto& s = enumeration_stats();
  return {s.vertical_inexact == 0 && s.vertical_suboptimal == 0 && s.seconds < 120.0,
          fmt("all %zu realizable plans (n<=6, k_s<=3, dT<=3): vertical inexact on %zu; among the %zu exact, suboptimal on %zu; "
              "%.2fs",
              s.instances, s.vertical_inexact, s.exact_subset, s.vertical_suboptimal, s.seconds)};
}

Outcome fixed_plan_invariance() {
  const auto& s = enumeration_stats();
  return {s.theorem4_failures == 0 && s.theorem4_checks > 0,
          fmt("%zu exact-realization comparisons, %zu differ, worst difference %.3g (tol 1e-10)", s.theorem4_checks,
              s.theorem4_failures, s.theorem4_worst)};
}

Outcome qp_contract() {
  const auto start = Clock::now();
  RandomStream rng(606);
  double worst_gap = 0.0, worst_kkt = 0.0, worst_violation = 0.0;
  std::size_t unsolved = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = static_cast<Eigen::Index>(1 + rng.uniform_index(20));
    const auto planted = fara::testing::planted_qp(rng, n);
    const auto sol = solve_qp(planted.problem);
    if (!sol.ok()) {
      ++unsolved;
      continue;
    }
    worst_gap = std::max(worst_gap, std::abs(planted.problem.objective(sol.x) - planted.optimum));
    worst_kkt = std::max(worst_kkt, sol.residuals.max());
    worst_violation = std::max(worst_violation, fara::testing::constraint_violation(planted.problem, sol.x));
  }
  const double t = seconds_since(start);
  return {unsolved == 0 && worst_gap <= 1e-6 && worst_kkt <= 1e-6 && worst_violation <= 1e-6 && t < 30.0,
          fmt("50 planted QPs: %zu unsolved, objective gap %.3g, KKT %.3g, constraint violation %.3g (tol 1e-6), %.2fs",
              unsolved, worst_gap, worst_kkt, worst_violation, t)};
}

SimulationConfig desk_config(PolicyKind kind, double alpha) {
  SimulationConfig c;
  c.dataset.synthetic = SyntheticSpec{.n_queries = 50, .docs_per_query = 20, .y_max = 2, .seed = 0};
  c.policy.kind = kind;
  c.policy.alpha = alpha;
  c.steps = 50000;
  c.seeds = {0, 1, 2, 3, 4};
  return c;
}

constexpr double kFairCoLargeAlpha = 100.0;

Outcome desk_orderings() {
  const auto start = Clock::now();
  const auto fara_run = run_simulation(desk_config(PolicyKind::fara, 1.0));
  const auto topk = run_simulation(desk_config(PolicyKind::topk, 0.0));
  const auto fairco = run_simulation(desk_config(PolicyKind::fairco, kFairCoLargeAlpha));
  const auto horiz = run_simulation(desk_config(PolicyKind::fara_horiz, 1.0));
  const double t = seconds_since(start);
  const auto u = [](const RunResult& r) { return r.aggregate.means.at("unfairness"); };
  const auto c1 = [](const RunResult& r) { return r.aggregate.means.at("cndcg@1"); };
  const bool a = u(fara_run) * 10.0 <= u(topk);
  const bool b = c1(fara_run) > c1(fairco);
  const bool c = c1(fara_run) >= c1(horiz);
  const double rel = std::abs(u(fara_run) - u(fairco)) / std::max(u(fara_run), u(fairco));
  const bool d = rel <= 0.10;
  return {a && b && c && d && t < 900.0,
          fmt("(a) %s unfairness FARA %.4g vs TopK %.4g (%.0fx); (b) %s cNDCG@1 FARA %.2f vs FairCo %.2f; "
              "(c) %s FARA %.2f vs FARA-Horiz %.2f; (d) %s unfairness FARA %.4g vs FairCo(alpha=%g) %.4g "
              "(relative gap %.0f%%, tol 10%%); %.1fs",
              a ? "ok" : "FAIL", u(fara_run), u(topk), u(topk) / u(fara_run), b ? "ok" : "FAIL", c1(fara_run),
              c1(fairco), c ? "ok" : "FAIL", c1(fara_run), c1(horiz), d ? "ok" : "FAIL", u(fara_run),
              kFairCoLargeAlpha, u(fairco), 100.0 * rel, t)};
}

// Weakly decreasing along the sequence, tolerating one increase no larger than
// the larger of the two adjacent standard deviations.
bool weakly_decreasing(const std::vector<double>& mean, const std::vector<double>& sd, std::size_t& inversions) {
  inversions = 0;
  for (std::size_t i = 1; i < mean.size(); ++i) {
    if (mean[i] <= mean[i - 1]) continue;
    ++inversions;
    if (mean[i] - mean[i - 1] > std::max(sd[i], sd[i - 1])) return false;
  }
  return inversions <= 1;
}

Outcome tradeoff_monotonicity() {
  const auto start = Clock::now();
  const std::vector<double> alphas{0.0, 0.25, 0.5, 0.75, 1.0};
  const auto points = sweep_alpha(desk_config(PolicyKind::fara, 0.0), alphas);
  std::vector<double> um, us, cm, cs;
  std::string series;
  for (const auto& p : points) {
    if (!p.result) return {false, "sweep point alpha=" + std::to_string(p.alpha) + " failed: " + p.error};
    um.push_back(p.result->aggregate.means.at("unfairness"));
    us.push_back(p.result->aggregate.stddevs.at("unfairness"));
    cm.push_back(p.result->aggregate.means.at("cndcg@5"));
    cs.push_back(p.result->aggregate.stddevs.at("cndcg@5"));
    series += fmt(" [a=%.2f U=%.4g C5=%.2f]", p.alpha, um.back(), cm.back());
  }
  std::size_t ui = 0, ci = 0;
  const bool ok_u = weakly_decreasing(um, us, ui);
  const bool ok_c = weakly_decreasing(cm, cs, ci);
  return {ok_u && ok_c,
          fmt("unfairness inversions %zu, cNDCG@5 inversions %zu, %.1fs;", ui, ci, seconds_since(start)) + series};
}

Outcome exploration_ablation() {
  const auto start = Clock::now();
  auto with = desk_config(PolicyKind::fara, 1.0);
  with.policy.setting = Setting::online;
  with.policy.planner.beta = 1.0;
  with.policy.planner.e_min = 10.0;
  auto without = with;
  without.policy.planner.beta = 0.0;
  const auto a = run_simulation(with);
  const auto b = run_simulation(without);
  const double ua = a.aggregate.means.at("unfairness"), ub = b.aggregate.means.at("unfairness");
  const double ma = a.aggregate.means.at("relevance_mae"), mb = b.aggregate.means.at("relevance_mae");
  return {ua <= ub && ma < mb,
          fmt("unfairness beta=1 %.5g vs beta=0 %.5g; estimate MAE beta=1 %.4g vs beta=0 %.4g; %.1fs", ua, ub, ma, mb,
              seconds_since(start))};
}

Outcome conservation_determinism() {
  const auto start = Clock::now();
  bool ok = true;
  std::string detail;
  for (auto [kind, setting] : {std::pair{PolicyKind::fara, Setting::online}, std::pair{PolicyKind::fara, Setting::post_processing},
                               std::pair{PolicyKind::fairco, Setting::post_processing}}) {
    auto c = desk_config(kind, kind == PolicyKind::fara ? 0.5 : 10.0);
    c.policy.setting = setting;
    c.steps = 100000;
    const Dataset ds = load_dataset(c.dataset);
    std::uint64_t hashes[2] = {1469598103934665603ULL, 1469598103934665603ULL};
    SeedResult runs[2];
    for (int rep = 0; rep < 2; ++rep) {
      std::uint64_t& h = hashes[rep];
      runs[rep] = run_seed(ds, c, 7, [&h](const SessionEvent& e) {
        for (ItemIndex d : e.ranklist) h = (h ^ d) * 1099511628211ULL;
        for (auto k : e.clicks) h = (h ^ k) * 1099511628211ULL;
      });
    }
    const bool same = hashes[0] == hashes[1] && runs[0].cndcg == runs[1].cndcg &&
                      runs[0].unfairness == runs[1].unfairness && runs[0].relevance_mae == runs[1].relevance_mae;
    const bool conserved = runs[0].conservation_error <= 1e-6;
    ok = ok && same && conserved;
    detail += fmt("%s/%s: conservation error %.3g, %s; ", std::string(to_string(kind)).c_str(),
                  std::string(to_string(setting)).c_str(), runs[0].conservation_error,
                  same ? "bit-identical" : "NOT identical");
  }
  return {ok, detail + fmt("%.1fs", seconds_since(start))};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"Taylor exactness", taylor_exactness},
      {"gradient and Hessian", gradient_hessian},
      {"allocation residual bound", residual_bound},
      {"vertical allocation optimality", vertical_optimality},
      {"fixed-plan metric invariance", fixed_plan_invariance},
      {"QP solver contract", qp_contract},
      {"desk-scale orderings", desk_orderings},
      {"tradeoff monotonicity", tradeoff_monotonicity},
      {"online exploration ablation", exploration_ablation},
      {"conservation and determinism", conservation_determinism},
  };
  std::set<std::size_t> selected;
  for (int i = 1; i < argc; ++i) selected.insert(static_cast<std::size_t>(std::atoi(argv[i])));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected.empty() && !selected.count(i + 1)) continue;
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %zu (%s): %s\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                out.detail.c_str());
    std::fflush(stdout);
    failures += out.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
