#include "fara/results_io.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <type_traits>

#include <json.hpp>

namespace fara {

namespace {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

std::string number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

ordered config_json(const SimulationConfig& c) {
  ordered dataset;
  if (c.dataset.path) dataset["path"] = c.dataset.path->string();
  if (c.dataset.synthetic) {
    const auto& s = *c.dataset.synthetic;
    dataset["synthetic"] = {{"queries", s.n_queries}, {"docs", s.docs_per_query}, {"y_max", s.y_max}, {"seed", s.seed}};
  }
  if (c.dataset.y_max) dataset["y_max"] = *c.dataset.y_max;
  ordered out;
  out["dataset"] = dataset;
  out["partition"] = to_string(c.partition);
  out["policy"] = to_string(c.policy.kind);
  out["setting"] = to_string(c.policy.setting);
  out["alpha"] = c.policy.alpha;
  out["delta_t"] = c.policy.planner.delta_t;
  out["beta"] = c.policy.planner.beta;
  out["e_min"] = c.policy.planner.e_min;
  out["steps"] = c.steps;
  out["seeds"] = c.seeds;
  out["k_s"] = c.metric.k_s;
  out["gamma"] = c.metric.gamma;
  out["cutoffs"] = c.metric.cutoffs;
  out["epsilon"] = c.epsilon;
  out["trajectory_interval"] = c.trajectory_interval;
  return out;
}

SimulationConfig config_from(const json& j) {
  SimulationConfig c;
  const auto& d = j.at("dataset");
  if (d.contains("path")) c.dataset.path = d.at("path").get<std::string>();
  if (d.contains("synthetic")) {
    const auto& s = d.at("synthetic");
    c.dataset.synthetic = SyntheticSpec{s.at("queries").get<std::size_t>(), s.at("docs").get<std::size_t>(),
                                        s.at("y_max").get<int>(), s.at("seed").get<std::uint64_t>()};
  }
  if (d.contains("y_max")) c.dataset.y_max = d.at("y_max").get<int>();
  c.partition = partition_from_string(j.at("partition").get<std::string>());
  c.policy.kind = policy_from_string(j.at("policy").get<std::string>());
  c.policy.setting = setting_from_string(j.at("setting").get<std::string>());
  c.policy.alpha = j.at("alpha").get<double>();
  c.policy.planner.delta_t = j.at("delta_t").get<std::size_t>();
  c.policy.planner.beta = j.at("beta").get<double>();
  c.policy.planner.e_min = j.at("e_min").get<double>();
  c.steps = j.at("steps").get<std::size_t>();
  c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  c.metric.k_s = j.at("k_s").get<std::size_t>();
  c.metric.gamma = j.at("gamma").get<double>();
  c.metric.cutoffs = j.at("cutoffs").get<std::vector<std::size_t>>();
  c.epsilon = j.at("epsilon").get<double>();
  c.trajectory_interval = j.at("trajectory_interval").get<std::size_t>();
  return c;
}

template <typename Map>
ordered keyed(const Map& m) {
  ordered out = ordered::object();
  for (const auto& [k, v] : m) {
    if constexpr (std::is_same_v<typename Map::key_type, std::string>) {
      out[k] = v;
    } else {
      out[std::to_string(k)] = v;
    }
  }
  return out;
}

std::map<std::size_t, double> cutoff_map(const json& j) {
  std::map<std::size_t, double> out;
  for (const auto& [k, v] : j.items()) out[std::stoul(k)] = v.get<double>();
  return out;
}

ordered run_json(const RunResult& run) {
  ordered out;
  out["schema_version"] = kSchemaVersion;
  out["config"] = config_json(run.config);
  ordered seeds = ordered::array();
  for (const auto& s : run.per_seed) {
    ordered row;
    row["seed"] = s.seed;
    row["cndcg"] = keyed(s.cndcg);
    row["unfairness"] = s.unfairness;
    row["wall_time_s"] = s.wall_time_s;
    row["aver_ndcg"] = keyed(s.aver_ndcg);
    row["relevance_mae"] = s.relevance_mae;
    row["solver_fallbacks"] = s.solver_fallbacks;
    row["conservation_error"] = s.conservation_error;
    if (!s.trajectory.empty()) {
      ordered traj = ordered::array();
      for (const auto& p : s.trajectory) {
        traj.push_back({{"step", p.step}, {"unfairness", p.unfairness}, {"relevance_mae", p.relevance_mae}});
      }
      row["trajectory"] = traj;
    }
    seeds.push_back(row);
  }
  out["per_seed"] = seeds;
  out["aggregate"] = {{"means", keyed(run.aggregate.means)}, {"stddevs", keyed(run.aggregate.stddevs)}};
  out["skipped_zero_ideal_queries"] = run.skipped_zero_ideal_queries;
  out["metadata"] = {{"unfairness", "end of run, true relevance, uniform mean over evaluated queries"},
                     {"query_sampling", "uniform over the partition"},
                     {"stddev", "sample (n - 1)"},
                     {"epsilon", run.config.epsilon}};
  return out;
}

RunResult run_from(const json& j) {
  RunResult run;
  run.config = config_from(j.at("config"));
  for (const auto& row : j.at("per_seed")) {
    SeedResult s;
    s.seed = row.at("seed").get<std::uint64_t>();
    s.cndcg = cutoff_map(row.at("cndcg"));
    s.unfairness = row.at("unfairness").get<double>();
    s.wall_time_s = row.at("wall_time_s").get<double>();
    if (row.contains("aver_ndcg")) s.aver_ndcg = cutoff_map(row.at("aver_ndcg"));
    s.relevance_mae = row.value("relevance_mae", 0.0);
    s.solver_fallbacks = row.value("solver_fallbacks", std::size_t{0});
    s.conservation_error = row.value("conservation_error", 0.0);
    if (row.contains("trajectory")) {
      for (const auto& p : row.at("trajectory")) {
        s.trajectory.push_back({p.at("step").get<std::size_t>(), p.at("unfairness").get<double>(),
                                p.at("relevance_mae").get<double>()});
      }
    }
    run.per_seed.push_back(std::move(s));
  }
  const auto& agg = j.at("aggregate");
  run.aggregate.means = agg.at("means").get<std::map<std::string, double>>();
  run.aggregate.stddevs = agg.at("stddevs").get<std::map<std::string, double>>();
  run.skipped_zero_ideal_queries = j.at("skipped_zero_ideal_queries").get<std::size_t>();
  return run;
}

}  // namespace

std::string_view to_string(OutputFormat format) { return format == OutputFormat::csv ? "csv" : "json"; }

OutputFormat format_from_string(std::string_view text) {
  if (text == "json") return OutputFormat::json;
  if (text == "csv") return OutputFormat::csv;
  throw ValidationError("unknown output format '" + std::string(text) + "'");
}

std::string results_json(std::span<const RunResult> runs, bool as_collection) {
  if (runs.size() == 1 && !as_collection) return run_json(runs.front()).dump(2) + "\n";
  ordered doc;
  doc["schema_version"] = kSchemaVersion;
  doc["runs"] = ordered::array();
  for (const auto& run : runs) doc["runs"].push_back(run_json(run));
  return doc.dump(2) + "\n";
}

std::string results_csv(std::span<const RunResult> runs) {
  std::vector<std::string> metrics;
  if (!runs.empty() && !runs.front().per_seed.empty()) {
    for (const auto& [key, v] : seed_metrics(runs.front().per_seed.front())) metrics.push_back(key);
  } else {
    for (std::size_t c : MetricConfig{}.cutoffs) metrics.push_back("cndcg@" + std::to_string(c));
    metrics.push_back("unfairness");
    metrics.push_back("wall_time_s");
  }
  std::ostringstream out;
  out << "row_kind,policy,setting,alpha,seed";
  for (const auto& m : metrics) out << ',' << m;
  out << '\n';
  for (const auto& run : runs) {
    const auto prefix = [&](std::string_view kind) {
      out << kind << ',' << to_string(run.config.policy.kind) << ',' << to_string(run.config.policy.setting) << ','
          << number(run.config.policy.alpha) << ',';
    };
    const auto row = [&](const std::map<std::string, double>& values) {
      for (const auto& m : metrics) {
        out << ',';
        if (auto it = values.find(m); it != values.end()) out << number(it->second);
      }
      out << '\n';
    };
    for (const auto& s : run.per_seed) {
      prefix("seed");
      out << s.seed;
      row(seed_metrics(s));
    }
    prefix("mean");
    row(run.aggregate.means);
    prefix("stddev");
    row(run.aggregate.stddevs);
  }
  return out.str();
}

void emit_results(std::span<const RunResult> runs, std::ostream& out, OutputFormat format, bool as_collection) {
  out << (format == OutputFormat::json ? results_json(runs, as_collection) : results_csv(runs));
}

void emit_results(std::span<const RunResult> runs, const std::filesystem::path& path, OutputFormat format,
                  bool as_collection) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  emit_results(runs, file, format, as_collection);
  file.flush();
  if (!file) throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::vector<RunResult> read_results_json(std::string_view text) {
  std::vector<RunResult> runs;
  try {
    const json doc = json::parse(text);
    if (doc.contains("runs")) {
      for (const auto& r : doc.at("runs")) runs.push_back(run_from(r));
    } else {
      runs.push_back(run_from(doc));
    }
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("malformed results document: ") + e.what());
  }
  return runs;
}

}  // namespace fara
