#include <charconv>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fara/harness.hpp"
#include "fara/results_io.hpp"

namespace {

struct Options {
  std::string dataset;
  std::string synthetic;
  std::string partition = "test";
  std::string policy = "fara";
  std::string setting = "post";
  std::string seeds = "0,1,2,3,4";
  std::string format = "json";
  std::string output;
  std::string alphas;
  int y_max = -1;
  fara::SimulationConfig config;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return parts;
}

template <typename T>
T parse_int(const std::string& text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw fara::ValidationError("not an integer: '" + text + "'");
  }
  return value;
}

void add_run_flags(CLI::App& app, Options& o) {
  auto& c = o.config;
  auto* data = app.add_option("--dataset", o.dataset, "LETOR file or fold directory");
  auto* synth = app.add_option("--synthetic", o.synthetic, "Synthetic dataset Q,D,YMAX");
  data->excludes(synth);
  app.add_option("--y-max", o.y_max, "Maximum relevance grade of a LETOR dataset");
  app.add_option("--partition", o.partition, "train|valid|test");
  app.add_option("--policy", o.policy, "fara|fara-horiz|topk|randomk|fairco|mcfair");
  app.add_option("--setting", o.setting, "post|online");
  app.add_option("--alpha", c.policy.alpha, "Tradeoff parameter");
  app.add_option("--delta-t", c.policy.planner.delta_t, "Planning horizon in sessions");
  app.add_option("--beta", c.policy.planner.beta, "Exploration price (online)");
  app.add_option("--e-min", c.policy.planner.e_min, "Minimum exposure target (online)");
  app.add_option("--steps", c.steps, "Sessions to simulate");
  app.add_option("--seeds", o.seeds, "Comma-separated seeds");
  app.add_option("--k-s", c.metric.k_s, "Examination cutoff");
  app.add_option("--gamma", c.metric.gamma, "cum-NDCG discount");
  app.add_option("--epsilon", c.epsilon, "Click noise");
  app.add_option("--format", o.format, "json|csv");
  app.add_option("--output", o.output, "Output path (stdout when omitted)");
  app.add_option("--trajectory", c.trajectory_interval, "Log unfairness every N steps");
}

fara::SimulationConfig finalize(Options& o) {
  fara::SimulationConfig c = o.config;
  if (o.dataset.empty() == o.synthetic.empty()) {
    throw fara::ValidationError("exactly one of --dataset or --synthetic is required");
  }
  if (!o.dataset.empty()) {
    c.dataset.path = o.dataset;
    if (o.y_max >= 0) c.dataset.y_max = o.y_max;
  } else {
    const auto parts = split(o.synthetic, ',');
    if (parts.size() != 3) throw fara::ValidationError("--synthetic expects Q,D,YMAX");
    c.dataset.synthetic = fara::SyntheticSpec{parse_int<std::size_t>(parts[0]), parse_int<std::size_t>(parts[1]),
                                              parse_int<int>(parts[2]), 0};
  }
  c.partition = fara::partition_from_string(o.partition);
  c.policy.kind = fara::policy_from_string(o.policy);
  c.policy.setting = fara::setting_from_string(o.setting);
  c.seeds.clear();
  for (const auto& s : split(o.seeds, ',')) c.seeds.push_back(parse_int<std::uint64_t>(s));
  c.output_path = o.output;
  std::vector<std::size_t> cutoffs;
  for (std::size_t k : c.metric.cutoffs) {
    if (k <= c.metric.k_s) cutoffs.push_back(k);
  }
  if (cutoffs.empty() || cutoffs.back() != c.metric.k_s) cutoffs.push_back(c.metric.k_s);
  c.metric.cutoffs = cutoffs;
  return c;
}

void emit(const std::vector<fara::RunResult>& runs, const Options& o, bool as_collection) {
  const auto format = fara::format_from_string(o.format);
  if (o.output.empty()) {
    fara::emit_results(runs, std::cout, format, as_collection);
  } else {
    fara::emit_results(runs, std::filesystem::path(o.output), format, as_collection);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fair ranking simulation lab"};
  app.require_subcommand(1);
  Options run_opts;
  Options sweep_opts;
  auto* run = app.add_subcommand("run", "Simulate one configuration over all seeds");
  add_run_flags(*run, run_opts);
  auto* sweep = app.add_subcommand("sweep", "Simulate one configuration per alpha");
  add_run_flags(*sweep, sweep_opts);
  sweep->add_option("--alphas", sweep_opts.alphas, "START:END:STEP")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  fara::SimulationConfig config;
  std::vector<double> alphas;
  fara::Dataset dataset;
  Options& o = run->parsed() ? run_opts : sweep_opts;
  try {
    config = finalize(o);
    if (sweep->parsed()) alphas = fara::parse_alpha_range(o.alphas);
    config.validate();
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }

  try {
    dataset = fara::load_dataset(config.dataset);
    std::vector<fara::RunResult> runs;
    if (run->parsed()) {
      runs.push_back(fara::run_simulation(dataset, config));
    } else {
      int failures = 0;
      for (auto& point : fara::sweep_alpha(dataset, config, alphas)) {
        if (point.result) {
          runs.push_back(std::move(*point.result));
        } else {
          ++failures;
          std::cerr << "alpha " << point.alpha << ": " << point.error << '\n';
        }
      }
      emit(runs, o, true);
      return failures == 0 ? 0 : 2;
    }
    emit(runs, o, false);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
