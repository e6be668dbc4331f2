#include "fara/harness.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <string>

#include "fara/rng.hpp"
#include "fara/user_model.hpp"

namespace fara {

namespace {

struct QueryTrack {
  std::size_t dataset_index = 0;
  QueryState state;
  std::vector<double> ideal;  // per cutoff
  std::vector<double> cndcg;  // per cutoff
  bool scorable = true;
};

double mean_unfairness(const std::vector<QueryTrack>& tracks) {
  double sum = 0.0;
  for (const auto& t : tracks) sum += unfairness(t.state.ledger.exposures(), t.state.true_relevance);
  return sum / static_cast<double>(tracks.size());
}

double mean_abs_error(const std::vector<QueryTrack>& tracks) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& t : tracks) {
    for (std::size_t d = 0; d < t.state.n_items(); ++d) {
      sum += std::abs(t.state.relevance_est[d] - t.state.true_relevance[d]);
      ++count;
    }
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ValidationError("not a number: '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

Dataset load_dataset(const DatasetSource& source) {
  if (source.path.has_value() == source.synthetic.has_value()) {
    throw ValidationError("exactly one of a dataset path or a synthetic spec is required");
  }
  if (source.synthetic) return generate_synthetic(*source.synthetic);
  return load_letor(*source.path, source.y_max);
}

void SimulationConfig::validate() const {
  if (steps < 1) throw ValidationError("steps must be at least 1");
  if (seeds.empty()) throw ValidationError("at least one seed is required");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ValidationError("epsilon must lie in [0, 1]");
  metric.validate();
  (void)policy.normalized();
}

std::vector<std::size_t> evaluated_queries(const Dataset& dataset, Partition partition) {
  return dataset.partition_indices(partition);
}

SeedResult run_seed(const Dataset& dataset, const SimulationConfig& config, std::uint64_t seed,
                    const SessionObserver& observer) {
  const auto start = std::chrono::steady_clock::now();
  const PolicyConfig policy = config.policy.normalized();
  const ExaminationCurve curve(config.metric.k_s);
  const RelevanceModel model{config.epsilon, dataset.y_max()};
  const auto& cutoffs = config.metric.cutoffs;

  const std::vector<std::size_t> indices = evaluated_queries(dataset, config.partition);
  if (indices.empty()) throw ValidationError("partition " + std::string(to_string(config.partition)) + " is empty");

  std::vector<QueryTrack> tracks;
  tracks.reserve(indices.size());
  for (std::size_t qi : indices) {
    const auto& items = dataset.queries()[qi].items;
    std::vector<double> relevance;
    relevance.reserve(items.size());
    for (const auto& item : items) relevance.push_back(relevance_prob(item.grade, model));
    QueryTrack track{qi, QueryState(relevance, curve.k_s()), {}, std::vector<double>(cutoffs.size(), 0.0), true};
    for (std::size_t c : cutoffs) {
      track.ideal.push_back(ideal_dcg(relevance, c, curve));
      if (!(track.ideal.back() > 0.0)) track.scorable = false;
    }
    tracks.push_back(std::move(track));
  }

  const RandomStream root(seed);
  RandomStream sampler = root.split(1);
  RandomStream click_rng = root.split(2);
  RandomStream policy_rng = root.split(3);

  SeedResult result;
  result.seed = seed;
  for (std::size_t step = 1; step <= config.steps; ++step) {
    const std::size_t q = sampler.uniform_index(tracks.size());
    QueryTrack& track = tracks[q];
    const Ranklist ranklist = next_ranklist(track.state, policy, curve, policy_rng);
    const std::vector<std::uint8_t> clicks = simulate_clicks(ranklist, track.state.true_relevance, curve, click_rng);
    observe_session(track.state, ranklist, clicks, curve);
    if (track.scorable) {
      for (std::size_t c = 0; c < cutoffs.size(); ++c) {
        const double dcg = dcg_at(ranklist, track.state.true_relevance, cutoffs[c], curve);
        track.cndcg[c] = cum_ndcg_update(track.cndcg[c], dcg, track.ideal[c], config.metric.gamma);
      }
    }
    if (observer) observer(SessionEvent{step, q, ranklist, clicks, track.state});
    if (config.trajectory_interval > 0 && step % config.trajectory_interval == 0) {
      result.trajectory.push_back({step, mean_unfairness(tracks), mean_abs_error(tracks)});
    }
  }

  std::size_t scorable = 0;
  for (const auto& t : tracks) scorable += t.scorable ? 1 : 0;
  for (std::size_t c = 0; c < cutoffs.size(); ++c) {
    double cum = 0.0;
    double aver = 0.0;
    for (const auto& t : tracks) {
      if (!t.scorable) continue;
      cum += t.cndcg[c];
      const std::size_t sessions = t.state.ledger.sessions_served();
      if (sessions > 0) {
        aver += aver_ndcg_from_exposure(t.state.ledger.exposures_at(cutoffs[c]), t.state.true_relevance, t.ideal[c],
                                        sessions);
      }
    }
    result.cndcg[cutoffs[c]] = scorable ? cum / static_cast<double>(scorable) : 0.0;
    result.aver_ndcg[cutoffs[c]] = scorable ? aver / static_cast<double>(scorable) : 0.0;
  }
  result.unfairness = mean_unfairness(tracks);
  result.relevance_mae = mean_abs_error(tracks);
  for (const auto& t : tracks) {
    result.solver_fallbacks += t.state.solver_fallbacks;
    const auto exposure = t.state.ledger.exposures();
    double total = 0.0;
    for (double e : exposure) total += e;
    const double expected = static_cast<double>(t.state.ledger.sessions_served()) *
                            curve.prefix_mass(curve.list_length(t.state.n_items()));
    result.conservation_error = std::max(result.conservation_error, std::abs(total - expected));
  }
  result.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::map<std::string, double> seed_metrics(const SeedResult& result) {
  std::map<std::string, double> out;
  for (const auto& [c, v] : result.cndcg) out["cndcg@" + std::to_string(c)] = v;
  for (const auto& [c, v] : result.aver_ndcg) out["aver_ndcg@" + std::to_string(c)] = v;
  out["unfairness"] = result.unfairness;
  out["relevance_mae"] = result.relevance_mae;
  out["wall_time_s"] = result.wall_time_s;
  out["solver_fallbacks"] = static_cast<double>(result.solver_fallbacks);
  return out;
}

Summary summarize(std::span<const SeedResult> per_seed) {
  Summary summary;
  if (per_seed.empty()) return summary;
  std::map<std::string, std::vector<double>> columns;
  for (const auto& r : per_seed) {
    for (const auto& [key, v] : seed_metrics(r)) columns[key].push_back(v);
  }
  for (const auto& [key, values] : columns) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    summary.means[key] = mean;
    summary.stddevs[key] = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
  }
  return summary;
}

RunResult run_simulation(const Dataset& dataset, const SimulationConfig& config) {
  config.validate();
  if (evaluated_queries(dataset, config.partition).empty()) {
    throw ValidationError("partition " + std::string(to_string(config.partition)) + " is empty");
  }
  RunResult run;
  run.config = config;
  const ExaminationCurve curve(config.metric.k_s);
  const RelevanceModel model{config.epsilon, dataset.y_max()};
  for (std::size_t qi : evaluated_queries(dataset, config.partition)) {
    std::vector<double> relevance;
    for (const auto& item : dataset.queries()[qi].items) relevance.push_back(relevance_prob(item.grade, model));
    if (!(ideal_dcg(relevance, 1, curve) > 0.0)) ++run.skipped_zero_ideal_queries;
  }
  for (std::uint64_t seed : config.seeds) run.per_seed.push_back(run_seed(dataset, config, seed));
  run.aggregate = summarize(run.per_seed);
  return run;
}

RunResult run_simulation(const SimulationConfig& config) {
  config.validate();
  return run_simulation(load_dataset(config.dataset), config);
}

std::vector<SweepPoint> sweep_alpha(const Dataset& dataset, const SimulationConfig& base,
                                    std::span<const double> alphas) {
  std::vector<SweepPoint> points;
  points.reserve(alphas.size());
  for (double alpha : alphas) {
    SweepPoint point;
    point.alpha = alpha;
    SimulationConfig config = base;
    config.policy.alpha = alpha;
    try {
      point.result = run_simulation(dataset, config);
    } catch (const std::exception& e) {
      point.error = e.what();
    }
    points.push_back(std::move(point));
  }
  return points;
}

std::vector<SweepPoint> sweep_alpha(const SimulationConfig& base, std::span<const double> alphas) {
  return sweep_alpha(load_dataset(base.dataset), base, alphas);
}

std::vector<double> parse_alpha_range(std::string_view text) {
  const auto first = text.find(':');
  const auto second = first == std::string_view::npos ? first : text.find(':', first + 1);
  if (second == std::string_view::npos) throw ValidationError("alpha range must be START:END:STEP");
  const double start = parse_double(text.substr(0, first));
  const double end = parse_double(text.substr(first + 1, second - first - 1));
  const double step = parse_double(text.substr(second + 1));
  if (!(step > 0.0)) throw ValidationError("alpha step must be positive");
  if (!(end >= start)) throw ValidationError("alpha range end must not precede its start");
  const auto count = static_cast<std::size_t>(std::floor((end - start) / step + 1e-9)) + 1;
  std::vector<double> alphas;
  alphas.reserve(count);
  for (std::size_t i = 0; i < count; ++i) alphas.push_back(std::min(end, start + static_cast<double>(i) * step));
  return alphas;
}

}  // namespace fara
