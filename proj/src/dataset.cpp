#include "fara/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "fara/common.hpp"
#include "fara/rng.hpp"

namespace fara {

std::string_view to_string(Partition partition) {
  switch (partition) {
    case Partition::train: return "train";
    case Partition::valid: return "valid";
    case Partition::test: return "test";
  }
  return "unknown";
}

Partition partition_from_string(std::string_view text) {
  if (text == "train") return Partition::train;
  if (text == "valid" || text == "vali") return Partition::valid;
  if (text == "test") return Partition::test;
  throw ValidationError("unknown partition '" + std::string(text) + "'");
}

Dataset::Dataset(std::string name, int y_max, std::vector<QueryInstance> queries)
    : name_(std::move(name)), y_max_(y_max), queries_(std::move(queries)) {
  if (y_max_ < 0) throw ValidationError("y_max must be non-negative");
  for (std::size_t qi = 0; qi < queries_.size(); ++qi) {
    const QueryInstance& q = queries_[qi];
    if (q.items.empty()) throw ValidationError("query '" + q.query_id + "' has no items");
    if (!by_id_.emplace(q.query_id, qi).second) {
      throw ValidationError("duplicate query id '" + q.query_id + "'");
    }
    std::unordered_set<std::string_view> seen;
    for (const ItemRecord& item : q.items) {
      if (item.grade < 0 || item.grade > y_max_) {
        throw ValidationError("query '" + q.query_id + "': grade " + std::to_string(item.grade) +
                              " outside [0, " + std::to_string(y_max_) + "]");
      }
      if (!seen.insert(item.item_id).second) {
        throw ValidationError("query '" + q.query_id + "': duplicate item id '" + item.item_id + "'");
      }
    }
  }
}

const QueryInstance* Dataset::find(std::string_view query_id) const {
  auto it = by_id_.find(std::string(query_id));
  return it == by_id_.end() ? nullptr : &queries_[it->second];
}

std::vector<std::size_t> Dataset::partition_indices(Partition partition) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < queries_.size(); ++i) {
    if (queries_[i].partition == partition) out.push_back(i);
  }
  return out;
}

std::array<std::size_t, 3> split_counts(std::size_t n_queries) {
  const std::size_t train = n_queries * 3 / 5;
  const std::size_t valid = n_queries / 5;
  return {train, valid, n_queries - train - valid};
}

namespace {

void assign_split(std::vector<QueryInstance>& queries) {
  const auto counts = split_counts(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (i < counts[0]) {
      queries[i].partition = Partition::train;
    } else if (i < counts[0] + counts[1]) {
      queries[i].partition = Partition::valid;
    } else {
      queries[i].partition = Partition::test;
    }
  }
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <typename T>
bool parse_number(std::string_view token, T& out) {
  const char* begin = token.data();
  const char* end = begin + token.size();
  if (begin != end && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

Dataset parse_letor(std::istream& in, const LetorOptions& options) {
  std::vector<QueryInstance> queries;
  std::unordered_map<std::string, std::size_t> index;
  int max_grade = 0;

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    std::vector<std::string_view> tokens;
    std::size_t pos = 0;
    while (pos < line.size()) {
      const auto start = line.find_first_not_of(" \t", pos);
      if (start == std::string_view::npos) break;
      auto stop = line.find_first_of(" \t", start);
      if (stop == std::string_view::npos) stop = line.size();
      tokens.push_back(line.substr(start, stop - start));
      pos = stop;
    }
    if (tokens.size() < 2) throw ParseError(line_no, "expected '<grade> qid:<id>'");

    int grade = 0;
    if (!parse_number(tokens[0], grade)) {
      throw ParseError(line_no, "invalid grade '" + std::string(tokens[0]) + "'");
    }
    if (!tokens[1].starts_with("qid:") || tokens[1].size() == 4) {
      throw ParseError(line_no, "expected qid:<id>, got '" + std::string(tokens[1]) + "'");
    }
    const std::string qid(tokens[1].substr(4));

    ItemRecord item;
    item.grade = grade;
    for (std::size_t t = 2; t < tokens.size(); ++t) {
      const auto colon = tokens[t].find(':');
      FeatureValue f;
      if (colon == std::string_view::npos || !parse_number(tokens[t].substr(0, colon), f.id) ||
          !parse_number(tokens[t].substr(colon + 1), f.value)) {
        throw ParseError(line_no, "invalid feature '" + std::string(tokens[t]) + "'");
      }
      item.features.push_back(f);
    }
    if (grade < 0) throw ValidationError("line " + std::to_string(line_no) + ": negative grade");
    if (options.y_max && grade > *options.y_max) {
      throw ValidationError("line " + std::to_string(line_no) + ": grade " + std::to_string(grade) +
                            " exceeds y_max " + std::to_string(*options.y_max));
    }
    max_grade = std::max(max_grade, grade);

    auto [it, inserted] = index.emplace(qid, queries.size());
    if (inserted) queries.push_back(QueryInstance{qid, {}, Partition::train});
    QueryInstance& query = queries[it->second];
    item.item_id = std::to_string(query.items.size());
    query.items.push_back(std::move(item));
  }

  if (options.partition) {
    for (auto& q : queries) q.partition = *options.partition;
  } else {
    assign_split(queries);
  }
  return Dataset(options.name, options.y_max.value_or(max_grade), std::move(queries));
}

Dataset load_letor(const std::filesystem::path& path, std::optional<int> y_max) {
  namespace fs = std::filesystem;
  auto open = [](const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot open dataset file '" + p.string() + "'");
    return in;
  };

  if (!fs::is_directory(path)) {
    auto in = open(path);
    LetorOptions options;
    options.name = path.stem().string();
    options.y_max = y_max;
    return parse_letor(in, options);
  }

  std::vector<QueryInstance> all;
  int max_grade = 0;
  const std::pair<const char*, Partition> parts[] = {
      {"train.txt", Partition::train}, {"vali.txt", Partition::valid}, {"test.txt", Partition::test}};
  for (const auto& [file, partition] : parts) {
    auto in = open(path / file);
    LetorOptions options;
    options.y_max = y_max;
    options.partition = partition;
    Dataset part = parse_letor(in, options);
    max_grade = std::max(max_grade, part.y_max());
    for (const auto& q : part.queries()) all.push_back(q);
  }
  return Dataset(path.filename().string(), y_max.value_or(max_grade), std::move(all));
}

void write_letor(const Dataset& dataset, std::ostream& out) {
  std::ostringstream line;
  line.precision(17);
  for (const auto& q : dataset.queries()) {
    for (const auto& item : q.items) {
      line.str({});
      line << item.grade << " qid:" << q.query_id;
      for (const auto& f : item.features) line << ' ' << f.id << ':' << f.value;
      out << line.str() << '\n';
    }
  }
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n_queries < 1 || spec.docs_per_query < 1) {
    throw ValidationError("synthetic dataset needs at least one query and one document per query");
  }
  if (spec.y_max < 0) throw ValidationError("y_max must be non-negative");

  RandomStream rng(spec.seed, 0x5e7);
  std::vector<QueryInstance> queries(spec.n_queries);
  for (std::size_t q = 0; q < spec.n_queries; ++q) {
    queries[q].query_id = std::to_string(q);
    queries[q].items.resize(spec.docs_per_query);
    for (std::size_t d = 0; d < spec.docs_per_query; ++d) {
      queries[q].items[d].item_id = std::to_string(d);
      queries[q].items[d].grade = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(spec.y_max) + 1));
    }
  }
  assign_split(queries);
  return Dataset("synthetic", spec.y_max, std::move(queries));
}

}  // namespace fara
