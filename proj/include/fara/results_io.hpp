#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fara/harness.hpp"

namespace fara {

inline constexpr int kSchemaVersion = 1;

enum class OutputFormat { json, csv };

std::string_view to_string(OutputFormat format);
OutputFormat format_from_string(std::string_view text);

/// A single run yields a run document unless as_collection is set; otherwise
/// {schema_version, runs}.
std::string results_json(std::span<const RunResult> runs, bool as_collection = false);

/// Header row, one row per (alpha, seed), then mean and stddev rows per run,
/// distinguished by the row_kind column.
std::string results_csv(std::span<const RunResult> runs);

void emit_results(std::span<const RunResult> runs, std::ostream& out, OutputFormat format,
                  bool as_collection = false);

/// Throws std::runtime_error naming the path on I/O failure.
void emit_results(std::span<const RunResult> runs, const std::filesystem::path& path, OutputFormat format,
                  bool as_collection = false);

/// Inverse of results_json. Throws ParseError on malformed documents.
std::vector<RunResult> read_results_json(std::string_view text);

}  // namespace fara
