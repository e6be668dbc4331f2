#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fara/dataset.hpp"
#include "fara/metrics.hpp"
#include "fara/policies.hpp"

namespace fara {

/// A LETOR path or a synthetic generator spec; exactly one is set.
struct DatasetSource {
  std::optional<std::filesystem::path> path;
  std::optional<SyntheticSpec> synthetic;
  std::optional<int> y_max;
};

Dataset load_dataset(const DatasetSource& source);

struct SimulationConfig {
  DatasetSource dataset;
  /// Queries are sampled from, and metrics reported on, this partition.
  Partition partition = Partition::test;
  PolicyConfig policy;
  std::size_t steps = 50000;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  MetricConfig metric;
  double epsilon = 0.1;
  std::string output_path;
  /// Record mean unfairness every this many steps; 0 disables.
  std::size_t trajectory_interval = 0;

  void validate() const;
};

struct TrajectoryPoint {
  std::size_t step = 0;
  double unfairness = 0.0;
  double relevance_mae = 0.0;
};

struct SeedResult {
  std::uint64_t seed = 0;
  /// Mean per-query cum-NDCG keyed by cutoff.
  std::map<std::size_t, double> cndcg;
  /// Mean per-query aver-NDCG keyed by cutoff.
  std::map<std::size_t, double> aver_ndcg;
  /// End-of-run unfairness with true relevance, averaged uniformly over queries.
  double unfairness = 0.0;
  /// Mean |R_hat - R| over every item of every evaluated query.
  double relevance_mae = 0.0;
  double wall_time_s = 0.0;
  std::size_t solver_fallbacks = 0;
  /// Largest per-query |sum_d E(d) - sessions * sum_{j <= len} P_j|.
  double conservation_error = 0.0;
  std::vector<TrajectoryPoint> trajectory;
};

struct Summary {
  std::map<std::string, double> means;
  std::map<std::string, double> stddevs;
};

struct RunResult {
  SimulationConfig config;
  std::vector<SeedResult> per_seed;
  Summary aggregate;
  std::size_t skipped_zero_ideal_queries = 0;
};

/// Flattened per-seed metrics: cndcg@k, aver_ndcg@k, unfairness,
/// relevance_mae, wall_time_s, solver_fallbacks.
std::map<std::string, double> seed_metrics(const SeedResult& result);

/// Mean and sample standard deviation (n - 1; 0 for a single seed).
Summary summarize(std::span<const SeedResult> per_seed);

struct SessionEvent {
  std::size_t step = 0;
  std::size_t query = 0;  // index into the evaluated query list
  const Ranklist& ranklist;
  const std::vector<std::uint8_t>& clicks;
  const QueryState& state;
};

using SessionObserver = std::function<void(const SessionEvent&)>;

/// Queries of config.partition with no zero-ideal filtering applied.
std::vector<std::size_t> evaluated_queries(const Dataset& dataset, Partition partition);

/// One seed over a loaded dataset. config.validate() must hold.
SeedResult run_seed(const Dataset& dataset, const SimulationConfig& config, std::uint64_t seed,
                    const SessionObserver& observer = {});

/// Loads the dataset and runs every seed. Throws ValidationError for an
/// invalid config or empty partition before any step.
RunResult run_simulation(const SimulationConfig& config);
RunResult run_simulation(const Dataset& dataset, const SimulationConfig& config);

struct SweepPoint {
  double alpha = 0.0;
  std::optional<RunResult> result;
  std::string error;
};

/// One run per alpha on shared seeds, ordered as given. Errors are captured
/// per point and the sweep continues.
std::vector<SweepPoint> sweep_alpha(const SimulationConfig& base, std::span<const double> alphas);
std::vector<SweepPoint> sweep_alpha(const Dataset& dataset, const SimulationConfig& base,
                                    std::span<const double> alphas);

/// START:END:STEP inclusive of END up to rounding.
std::vector<double> parse_alpha_range(std::string_view text);

}  // namespace fara
