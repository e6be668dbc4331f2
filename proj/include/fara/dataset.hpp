#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fara/common.hpp"

namespace fara {

enum class Partition { train, valid, test };

std::string_view to_string(Partition partition);
Partition partition_from_string(std::string_view text);

struct FeatureValue {
  std::uint32_t id = 0;
  double value = 0.0;

  bool operator==(const FeatureValue&) const = default;
};

/// A judged candidate. Features are retained for format fidelity only.
struct ItemRecord {
  std::string item_id;
  int grade = 0;
  std::vector<FeatureValue> features;

  bool operator==(const ItemRecord&) const = default;
};

struct QueryInstance {
  std::string query_id;
  std::vector<ItemRecord> items;
  Partition partition = Partition::train;

  std::size_t size() const { return items.size(); }
  bool operator==(const QueryInstance&) const = default;
};

/// Immutable collection of queries in first-appearance order.
class Dataset {
 public:
  Dataset() = default;

  /// Validates unique query ids, non-empty queries, unique item ids and
  /// grades in [0, y_max].
  Dataset(std::string name, int y_max, std::vector<QueryInstance> queries);

  const std::string& name() const { return name_; }
  int y_max() const { return y_max_; }
  const std::vector<QueryInstance>& queries() const { return queries_; }
  std::size_t size() const { return queries_.size(); }
  bool empty() const { return queries_.empty(); }

  const QueryInstance* find(std::string_view query_id) const;

  /// Indices into queries() belonging to one partition, in dataset order.
  std::vector<std::size_t> partition_indices(Partition partition) const;

  bool operator==(const Dataset& other) const {
    return name_ == other.name_ && y_max_ == other.y_max_ && queries_ == other.queries_;
  }

 private:
  std::string name_;
  int y_max_ = 0;
  std::vector<QueryInstance> queries_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

/// train/valid/test counts for n queries under the 60/20/20 rule.
/// Train and valid take floor(0.6n) and floor(0.2n); test takes the rest.
std::array<std::size_t, 3> split_counts(std::size_t n_queries);

struct LetorOptions {
  std::string name = "letor";
  /// Declared maximum grade; when absent the maximum grade present is used.
  std::optional<int> y_max;
  /// Assign every query to this partition instead of the 60/20/20 rule.
  std::optional<Partition> partition;
};

/// Parses `<grade> qid:<id> [<fid>:<val>]... [# comment]` lines.
/// Throws ParseError (with line number) or ValidationError.
Dataset parse_letor(std::istream& in, const LetorOptions& options = {});

/// Loads a single LETOR file (60/20/20 split by query order) or a fold
/// directory holding train.txt, vali.txt and test.txt.
Dataset load_letor(const std::filesystem::path& path, std::optional<int> y_max = std::nullopt);

/// Writes the dataset back in LETOR format, one line per item.
void write_letor(const Dataset& dataset, std::ostream& out);

struct SyntheticSpec {
  std::size_t n_queries = 50;
  std::size_t docs_per_query = 20;
  int y_max = 2;
  std::uint64_t seed = 0;
};

/// Uniform grades in [0, y_max]; deterministic in the seed.
Dataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace fara
