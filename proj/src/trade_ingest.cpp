#include "tradesbm/trade_ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include <boost/tokenizer.hpp>

#include "tradesbm/error.hpp"
#include "tradesbm/log.hpp"

namespace tradesbm {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_csv(const std::string& line, char delimiter) {
  using Separator = boost::escaped_list_separator<char>;
  boost::tokenizer<Separator> tokens(line, Separator('\\', delimiter, '"'));
  std::vector<std::string> fields;
  for (const auto& t : tokens) fields.emplace_back(trim(t));
  return fields;
}

std::string line_error(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

int parse_year(std::string_view text) {
  text = trim(text);
  int year = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), year);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw InputError("non-numeric year '" + std::string(text) + "'");
  }
  return year;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw InputError("missing column '" + name + "' in header");
  return static_cast<std::size_t>(it - header.begin());
}

auto record_key(const FlowRecord& r) { return std::tie(r.year, r.reporter, r.partner); }

}  // namespace

Cents parse_cents(std::string_view text) {
  text = trim(text);
  if (text.empty()) throw InputError("empty numeric field");
  bool negative = false;
  std::string_view body = text;
  if (body.front() == '+' || body.front() == '-') {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  if (body.empty()) throw InputError("non-numeric value '" + std::string(text) + "'");

  if (body.find_first_of("eE") != std::string_view::npos) {
    double v = 0.0;
    auto [end, ec] = std::from_chars(body.data(), body.data() + body.size(), v);
    if (ec != std::errc() || end != body.data() + body.size() || !std::isfinite(v)) {
      throw InputError("non-numeric value '" + std::string(text) + "'");
    }
    Cents c = std::llround(v * 100.0);
    return negative ? -c : c;
  }

  auto dot = body.find('.');
  std::string_view whole = body.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : body.substr(dot + 1);
  if (whole.empty() && frac.empty()) throw InputError("non-numeric value '" + std::string(text) + "'");
  auto all_digits = [](std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  if (!all_digits(whole) || !all_digits(frac)) {
    throw InputError("non-numeric value '" + std::string(text) + "'");
  }
  Cents units = 0;
  if (!whole.empty()) {
    auto [end, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), units);
    if (ec != std::errc()) throw InputError("value out of range '" + std::string(text) + "'");
  }
  Cents cents = units * 100;
  if (frac.size() >= 1) cents += 10 * (frac[0] - '0');
  if (frac.size() >= 2) cents += frac[1] - '0';
  if (frac.size() >= 3 && frac[2] >= '5') cents += 1;  // half-up on the third decimal
  return negative ? -cents : cents;
}

std::string format_cents(Cents value) {
  std::string sign = value < 0 ? "-" : "";
  Cents mag = value < 0 ? -value : value;
  std::string frac = std::to_string(mag % 100);
  if (frac.size() < 2) frac.insert(0, "0");
  return sign + std::to_string(mag / 100) + "." + frac;
}

std::optional<std::size_t> FlowTable::index_of(std::string_view code) const {
  auto it = std::lower_bound(universe.begin(), universe.end(), code);
  if (it == universe.end() || *it != code) return std::nullopt;
  return static_cast<std::size_t>(it - universe.begin());
}

bool FlowTable::has_year(int year) const {
  return std::binary_search(years.begin(), years.end(), year);
}

Cents FlowTable::total_exports() const {
  Cents total = 0;
  for (const auto& r : records) total += r.export_value;
  return total;
}

Cents FlowTable::total_imports() const {
  Cents total = 0;
  for (const auto& r : records) total += r.import_value;
  return total;
}

FlowTable make_flow_table(std::vector<FlowRecord> records, std::size_t* merged) {
  for (const auto& r : records) {
    if (r.reporter == r.partner) throw InputError("self-flow for '" + r.reporter + "'");
    if (r.export_value < 0 || r.import_value < 0) {
      throw InputError("negative flow value for " + r.reporter + "->" + r.partner);
    }
  }
  std::stable_sort(records.begin(), records.end(),
                   [](const FlowRecord& a, const FlowRecord& b) { return record_key(a) < record_key(b); });

  FlowTable table;
  std::size_t folded = 0;
  for (auto& r : records) {
    if (!table.records.empty() && record_key(table.records.back()) == record_key(r)) {
      table.records.back().export_value += r.export_value;
      table.records.back().import_value += r.import_value;
      ++folded;
    } else {
      table.records.push_back(std::move(r));
    }
  }
  std::set<std::string> codes;
  std::set<int> years;
  for (const auto& r : table.records) {
    codes.insert(r.reporter);
    codes.insert(r.partner);
    years.insert(r.year);
  }
  table.universe.assign(codes.begin(), codes.end());
  table.years.assign(years.begin(), years.end());
  table.stats.merged = folded;
  if (merged != nullptr) *merged = folded;
  return table;
}

FlowTable load_flow_table(const std::filesystem::path& path, const IngestFormat& format) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open flow table '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) throw InputError("flow table '" + path.string() + "' is empty");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_csv(line, format.delimiter);
  const std::size_t c_rep = column_index(header, format.reporter_column);
  const std::size_t c_par = column_index(header, format.partner_column);
  const std::size_t c_year = column_index(header, format.year_column);
  const std::size_t c_exp = column_index(header, format.export_column);
  const std::size_t c_imp = column_index(header, format.import_column);

  IngestStats stats;
  std::vector<FlowRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line, format.delimiter);
    if (fields.size() != header.size()) {
      throw InputError(line_error(line_no, "expected " + std::to_string(header.size()) +
                                               " columns, got " + std::to_string(fields.size())));
    }
    ++stats.rows_read;
    FlowRecord r;
    try {
      r.reporter = fields[c_rep];
      r.partner = fields[c_par];
      r.year = parse_year(fields[c_year]);
      r.export_value = parse_cents(fields[c_exp]);
      r.import_value = parse_cents(fields[c_imp]);
    } catch (const InputError& e) {
      throw InputError(line_error(line_no, e.what()));
    }
    if (r.reporter.empty() || r.partner.empty()) throw InputError(line_error(line_no, "empty country code"));
    if (r.export_value < 0 || r.import_value < 0) throw InputError(line_error(line_no, "negative value"));
    if (r.reporter == r.partner) {
      throw InputError(line_error(line_no, "reporter equals partner ('" + r.reporter + "')"));
    }
    if ((format.first_year && r.year < *format.first_year) || (format.last_year && r.year > *format.last_year)) {
      ++stats.dropped_window;
      continue;
    }
    if (r.export_value == 0 && r.import_value == 0) {
      ++stats.dropped_zero;
      continue;
    }
    if (format.orientation == ImportOrientation::reporter) {
      // Re-key the reporter's imports as the mirror statistic of the partner's flow.
      FlowRecord mirrored{r.partner, r.reporter, r.year, 0, r.import_value};
      r.import_value = 0;
      if (r.export_value > 0) records.push_back(std::move(r));
      if (mirrored.import_value > 0) records.push_back(std::move(mirrored));
    } else {
      records.push_back(std::move(r));
    }
  }
  if (records.empty()) throw InputError("flow table '" + path.string() + "' has no usable rows");

  FlowTable table = make_flow_table(std::move(records));
  const std::size_t merged = table.stats.merged;
  table.stats = stats;
  table.stats.merged = merged;
  logger()->info("loaded {}: {} rows, {} records, {} duplicate keys merged", path.string(), stats.rows_read,
                 table.records.size(), merged);
  return table;
}

void write_flow_table(const std::filesystem::path& path, const FlowTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << "reporter,partner,year,export_value,import_value\n";
  for (const auto& r : table.records) {
    out << r.reporter << ',' << r.partner << ',' << r.year << ',' << format_cents(r.export_value) << ','
        << format_cents(r.import_value) << '\n';
  }
}

CodeMap load_code_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open code map '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw InputError("code map '" + path.string() + "' is empty");
  const auto header = split_csv(line, ',');
  const std::size_t c_raw = column_index(header, "raw");
  const std::size_t c_can = column_index(header, "canonical");
  const auto retired_it = std::find(header.begin(), header.end(), "retired_after");
  const bool has_retired = retired_it != header.end();
  const std::size_t c_ret = static_cast<std::size_t>(retired_it - header.begin());

  CodeMap map;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line, ',');
    if (fields.size() != header.size()) throw InputError(line_error(line_no, "column count mismatch in code map"));
    const auto& raw = fields[c_raw];
    const auto& canonical = fields[c_can];
    if (raw.empty() || canonical.empty()) throw InputError(line_error(line_no, "empty code"));
    auto [it, inserted] = map.entries.emplace(raw, canonical);
    if (!inserted && it->second != canonical) {
      throw InputError(line_error(line_no, "raw code '" + raw + "' mapped to both '" + it->second + "' and '" +
                                               canonical + "'"));
    }
    if (has_retired && !fields[c_ret].empty()) {
      int year = 0;
      try {
        year = parse_year(fields[c_ret]);
      } catch (const InputError& e) {
        throw InputError(line_error(line_no, e.what()));
      }
      auto [rit, fresh] = map.retired.emplace(canonical, year);
      if (!fresh && rit->second != year) {
        throw InputError(line_error(line_no, "conflicting retirement years for '" + canonical + "'"));
      }
    }
  }
  return map;
}

HarmonizeResult harmonize_countries(const FlowTable& table, const CodeMap& map, const HarmonizeOptions& options) {
  HarmonizeResult result;
  auto& report = result.report;

  for (const auto& code : table.universe) {
    if (!map.entries.contains(code)) report.passthrough.push_back(code);
  }
  if (!report.passthrough.empty()) {
    std::string list;
    for (const auto& c : report.passthrough) list += (list.empty() ? "" : ", ") + c;
    if (options.strict) throw InputError("unknown country codes: " + list);
    logger()->warn("passing through unmapped country codes: {}", list);
  }

  auto canonical = [&](const std::string& raw) -> const std::string& {
    auto it = map.entries.find(raw);
    return it == map.entries.end() ? raw : it->second;
  };
  auto retired_by = [&](const std::string& code, int year) {
    auto it = map.retired.find(code);
    return it != map.retired.end() && year > it->second;
  };

  std::vector<FlowRecord> kept;
  kept.reserve(table.records.size());
  for (const auto& r : table.records) {
    FlowRecord m{canonical(r.reporter), canonical(r.partner), r.year, r.export_value, r.import_value};
    if (m.reporter == m.partner) {
      ++report.dropped_internal;
    } else if (retired_by(m.reporter, m.year) || retired_by(m.partner, m.year)) {
      ++report.dropped_retired;
    } else {
      kept.push_back(std::move(m));
      continue;
    }
    report.dropped_export_value += r.export_value;
    report.dropped_import_value += r.import_value;
  }
  if (kept.empty()) throw InputError("harmonization dropped every record");
  result.table = make_flow_table(std::move(kept), &report.merged);
  result.table.stats = table.stats;
  result.table.stats.merged += report.merged;
  if (report.dropped_retired + report.dropped_internal > 0) {
    logger()->info("harmonization dropped {} retired-code and {} internal records", report.dropped_retired,
                   report.dropped_internal);
  }
  return result;
}

FlowMatrix yearly_flow_matrix(const FlowTable& table, int year, Direction direction) {
  if (!table.has_year(year)) throw InputError("year " + std::to_string(year) + " not present in flow table");
  const std::size_t n = table.universe.size();
  FlowMatrix m;
  m.values = DenseMatrix(n, n, 0.0);
  m.year = year;
  m.kind = direction == Direction::exports ? NetworkKind::X : NetworkKind::I;
  m.universe = table.universe;

  auto first = std::lower_bound(table.records.begin(), table.records.end(), year,
                                [](const FlowRecord& r, int y) { return r.year < y; });
  for (auto it = first; it != table.records.end() && it->year == year; ++it) {
    const std::size_t r = *table.index_of(it->reporter);
    const std::size_t p = *table.index_of(it->partner);
    if (direction == Direction::exports) {
      m.values(r, p) += static_cast<double>(it->export_value);
    } else {
      m.values(p, r) += static_cast<double>(it->import_value);
    }
  }
  return m;
}

std::vector<bool> active_set(const FlowMatrix& flows) {
  const std::size_t n = flows.values.rows();
  std::vector<bool> active(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (flows.values(i, j) != 0.0) {
        active[i] = true;
        active[j] = true;
      }
    }
  }
  return active;
}

std::vector<FlowRecord> flow_records(const FlowMatrix& flows, Direction direction) {
  std::vector<FlowRecord> out;
  const std::size_t n = flows.values.rows();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = flows.values(i, j);
      if (v == 0.0) continue;
      const auto cents = static_cast<Cents>(v);
      if (static_cast<double>(cents) != v) throw InputError("flow matrix holds a fractional cent value");
      if (direction == Direction::exports) {
        out.push_back({flows.universe[i], flows.universe[j], flows.year, cents, 0});
      } else {
        out.push_back({flows.universe[j], flows.universe[i], flows.year, 0, cents});
      }
    }
  }
  return out;
}

}  // namespace tradesbm
