#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tradesbm/matrix.hpp"
#include "tradesbm/types.hpp"

namespace tradesbm {

// Currency amounts are carried as integer cents so that merge and drop
// totals reconcile exactly.
using Cents = std::int64_t;

Cents parse_cents(std::string_view text);
std::string format_cents(Cents value);

// One bilateral flow. `export_value` is the reporter's declared exports to the
// partner. `import_value` is the same goods flow seen from the other end: the
// partner's declared imports from the reporter.
struct FlowRecord {
  std::string reporter;
  std::string partner;
  int year = 0;
  Cents export_value = 0;
  Cents import_value = 0;

  bool operator==(const FlowRecord&) const = default;
};

// How the import column of an input file is oriented.
enum class ImportOrientation {
  mirror,    // partner's imports from reporter (native layout)
  reporter,  // reporter's imports from partner; re-keyed on load
};

struct IngestFormat {
  std::string reporter_column = "reporter";
  std::string partner_column = "partner";
  std::string year_column = "year";
  std::string export_column = "export_value";
  std::string import_column = "import_value";
  char delimiter = ',';
  ImportOrientation orientation = ImportOrientation::mirror;
  std::optional<int> first_year;
  std::optional<int> last_year;
};

struct IngestStats {
  std::size_t rows_read = 0;
  std::size_t merged = 0;          // rows folded into an existing key
  std::size_t dropped_zero = 0;    // rows with zero export and import
  std::size_t dropped_window = 0;  // rows outside the study window
};

// Long-format flow table. Records are unique per (reporter, partner, year) and
// sorted by (year, reporter, partner). `universe` and `years` are sorted.
struct FlowTable {
  std::vector<FlowRecord> records;
  std::vector<std::string> universe;
  std::vector<int> years;
  IngestStats stats;

  std::optional<std::size_t> index_of(std::string_view code) const;
  bool has_year(int year) const;
  Cents total_exports() const;
  Cents total_imports() const;
};

// Merges duplicate keys by summation and rebuilds universe/years. Rejects
// self-flows and negative values. `merged` counts folded duplicates.
FlowTable make_flow_table(std::vector<FlowRecord> records, std::size_t* merged = nullptr);

FlowTable load_flow_table(const std::filesystem::path& path, const IngestFormat& format = {});
void write_flow_table(const std::filesystem::path& path, const FlowTable& table);

struct CodeMap {
  std::map<std::string, std::string> entries;  // raw -> canonical
  std::map<std::string, int> retired;          // canonical -> last valid year
};

CodeMap load_code_map(const std::filesystem::path& path);

struct HarmonizeOptions {
  bool strict = false;
};

struct HarmonizeReport {
  std::size_t dropped_retired = 0;
  std::size_t dropped_internal = 0;  // both ends collapsed onto one code
  Cents dropped_export_value = 0;
  Cents dropped_import_value = 0;
  std::size_t merged = 0;
  std::vector<std::string> passthrough;  // unknown codes kept as-is
};

struct HarmonizeResult {
  FlowTable table;
  HarmonizeReport report;
};

HarmonizeResult harmonize_countries(const FlowTable& table, const CodeMap& map,
                                    const HarmonizeOptions& options = {});

// Square flow matrix over a fixed universe. Row i, column j is the flow of
// goods from i to j; values are in cents.
struct FlowMatrix {
  DenseMatrix values;
  int year = 0;
  NetworkKind kind = NetworkKind::X;
  std::vector<std::string> universe;
};

// Exports: (reporter, partner) <- export_value. Imports: (partner, reporter)
// <- import_value, i.e. row i lists i's imports by source.
FlowMatrix yearly_flow_matrix(const FlowTable& table, int year, Direction direction);

// Countries with any nonzero entry in their row or column.
std::vector<bool> active_set(const FlowMatrix& flows);

// Inverse of yearly_flow_matrix for one direction; values must be whole cents.
std::vector<FlowRecord> flow_records(const FlowMatrix& flows, Direction direction);

}  // namespace tradesbm
