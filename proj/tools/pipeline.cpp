#include "pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "tradesbm/error.hpp"
#include "tradesbm/io.hpp"
#include "tradesbm/log.hpp"
#include "tradesbm/metrics.hpp"
#include "tradesbm/sbm.hpp"

#ifndef TRADESBM_VERSION
#define TRADESBM_VERSION "unknown"
#endif

namespace tradesbm::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "input",   "code_map",  "strict_codes", "orientation", "years",        "kinds",         "tau",
      "keep_isolated", "q",   "q_range",      "restarts",    "max_iters",    "seed",          "threads",
      "tiers",   "tier_overrides", "strength", "concentration", "out"};
  return keys;
}

const std::vector<std::string>& commands() {
  static const std::vector<std::string> cmds{"ingest", "build", "fit", "sweep-q", "metrics", "tiers", "export", "all"};
  return cmds;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T v{};
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::optional<std::pair<int, int>> parse_range(std::string_view s) {
  const auto pos = s.find("..");
  if (pos == std::string_view::npos) return std::nullopt;
  auto a = parse_number<int>(trim(s.substr(0, pos)));
  auto b = parse_number<int>(trim(s.substr(pos + 2)));
  if (!a || !b) return std::nullopt;
  return std::pair{*a, *b};
}

std::optional<bool> parse_bool(std::string_view s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  return std::nullopt;
}

class Parser {
 public:
  explicit Parser(const RawConfig& raw) : raw_(raw) {}

  const std::string* get(const std::string& key) const {
    auto it = raw_.find(key);
    return it == raw_.end() ? nullptr : &it->second;
  }
  void fail(const std::string& field, const std::string& message) { errors_.push_back({field, message}); }
  std::vector<FieldError>& errors() { return errors_; }

  template <typename T>
  void number(const std::string& key, T& target, T lo, T hi) {
    const auto* v = get(key);
    if (!v) return;
    auto parsed = parse_number<T>(*v);
    if (!parsed) return fail(key, fmt::format("'{}' is not a number", *v));
    if (*parsed < lo || *parsed > hi) return fail(key, fmt::format("{} outside [{}, {}]", *parsed, lo, hi));
    target = *parsed;
  }

  void boolean(const std::string& key, bool& target) {
    const auto* v = get(key);
    if (!v) return;
    auto parsed = parse_bool(*v);
    if (!parsed) return fail(key, fmt::format("'{}' is not a boolean", *v));
    target = *parsed;
  }

 private:
  const RawConfig& raw_;
  std::vector<FieldError> errors_;
};

}  // namespace

RawConfig read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config", "cannot read '" + path.string() + "'");
  RawConfig raw;
  std::vector<FieldError> errors;
  std::string line;
  for (std::size_t no = 1; std::getline(in, line); ++no) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      errors.push_back({"config", fmt::format("{}:{}: expected key = value", path.string(), no)});
      continue;
    }
    raw[trim(text.substr(0, eq))] = trim(text.substr(eq + 1));
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));
  return raw;
}

PipelineConfig parse_config(const RawConfig& raw) {
  PipelineConfig c;
  Parser p(raw);
  const auto& keys = config_keys();
  for (const auto& [key, value] : raw) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) p.fail(key, "unknown configuration key");
  }

  auto existing_path = [&](const std::string& key, std::optional<fs::path>& target) {
    if (const auto* v = p.get(key)) {
      if (v->empty()) return p.fail(key, "empty path");
      if (!fs::exists(*v)) return p.fail(key, fmt::format("file '{}' does not exist", *v));
      target = fs::path(*v);
    }
  };
  existing_path("input", c.input);
  existing_path("code_map", c.code_map);
  p.boolean("strict_codes", c.strict_codes);
  p.boolean("keep_isolated", c.keep_isolated);

  if (const auto* v = p.get("orientation")) {
    if (*v == "mirror") c.orientation = ImportOrientation::mirror;
    else if (*v == "reporter") c.orientation = ImportOrientation::reporter;
    else p.fail("orientation", "expected 'mirror' or 'reporter'");
  }
  if (const auto* v = p.get("years")) {
    auto r = parse_range(*v);
    if (!r) p.fail("years", fmt::format("'{}' is not a range A..B", *v));
    else if (r->first > r->second) p.fail("years", "first year after last year");
    else c.years = YearRange{r->first, r->second};
  }
  if (const auto* v = p.get("kinds")) {
    std::set<NetworkKind> kinds;
    for (const auto& part : split(*v, ',')) {
      try {
        kinds.insert(parse_network_kind(part));
      } catch (const InputError&) {
        p.fail("kinds", fmt::format("unknown network kind '{}'", part));
      }
    }
    c.kinds.assign(kinds.begin(), kinds.end());
    if (c.kinds.empty()) p.fail("kinds", "no network kinds given");
  }
  if (const auto* v = p.get("tau")) {
    auto t = parse_number<double>(*v);
    if (!t) p.fail("tau", fmt::format("'{}' is not a number", *v));
    else if (!(*t >= 0.0 && *t < 1.0)) p.fail("tau", "must lie in [0, 1)");
    else c.tau = *t;
  }
  if (p.get("q")) {
    int q = 0;
    p.number("q", q, 1, 1000);
    if (q > 0) c.q = q;
  }
  if (const auto* v = p.get("q_range")) {
    auto r = parse_range(*v);
    if (!r) p.fail("q_range", fmt::format("'{}' is not a range A..B", *v));
    else if (r->first < 1 || r->first > r->second) p.fail("q_range", "need 1 <= A <= B");
    else c.q_range = *r;
  }
  p.number("restarts", c.restarts, 1, 100000);
  p.number("max_iters", c.max_iters, 1, 1000000);
  p.number<std::uint64_t>("seed", c.seed, 0, std::numeric_limits<std::uint64_t>::max());
  p.number<unsigned>("threads", c.threads, 1, 1024);

  if (const auto* v = p.get("tiers")) {
    const auto parts = split(*v, ',');
    auto c1 = parts.size() == 2 ? parse_number<double>(parts[0]) : std::nullopt;
    auto c2 = parts.size() == 2 ? parse_number<double>(parts[1]) : std::nullopt;
    if (!c1 || !c2) p.fail("tiers", "expected two cut points c1,c2");
    else if (!(*c1 > 0.0 && *c1 < *c2 && *c2 < 1.0)) p.fail("tiers", "need 0 < c1 < c2 < 1");
    else c.tiers.core_cut = *c1, c.tiers.semi_cut = *c2;
  }
  if (const auto* v = p.get("tier_overrides")) {
    for (const auto& part : split(*v, ',')) {
      const auto colon = part.find(':');
      auto cluster = colon == std::string::npos ? std::nullopt : parse_number<int>(trim(part.substr(0, colon)));
      if (!cluster || *cluster < 1) {
        p.fail("tier_overrides", fmt::format("'{}' is not cluster:tier", part));
        continue;
      }
      try {
        c.tiers.overrides[*cluster] = tiers::parse_tier(trim(part.substr(colon + 1)));
      } catch (const InputError& e) {
        p.fail("tier_overrides", e.what());
      }
    }
  }
  if (const auto* v = p.get("strength")) {
    if (*v == "trade_share") c.strength = tiers::StrengthMeasure::trade_share;
    else if (*v == "retained_degree") c.strength = tiers::StrengthMeasure::retained_degree;
    else p.fail("strength", "expected 'trade_share' or 'retained_degree'");
  }
  if (const auto* v = p.get("concentration")) {
    if (*v == "hhi" || *v == "entropy") c.concentration = *v;
    else p.fail("concentration", "expected 'hhi' or 'entropy'");
  }
  if (const auto* v = p.get("out")) {
    if (v->empty()) p.fail("out", "empty path");
    else c.out = *v;
  }
  if (!p.errors().empty()) throw ValidationError(std::move(p.errors()));
  return c;
}

namespace {

std::string range_text(int a, int b) { return fmt::format("{}..{}", a, b); }

Json config_echo(const PipelineConfig& c) {
  Json j;
  j["input"] = c.input ? Json(c.input->string()) : Json(nullptr);
  j["code_map"] = c.code_map ? Json(c.code_map->string()) : Json(nullptr);
  j["strict_codes"] = c.strict_codes;
  j["orientation"] = c.orientation == ImportOrientation::mirror ? "mirror" : "reporter";
  j["years"] = c.years ? Json(range_text(c.years->first, c.years->last)) : Json(nullptr);
  std::vector<std::string> kinds;
  for (auto k : c.kinds) kinds.emplace_back(to_string(k));
  j["kinds"] = kinds;
  j["tau"] = c.tau;
  j["keep_isolated"] = c.keep_isolated;
  j["q"] = c.q ? Json(*c.q) : Json(nullptr);
  j["q_range"] = c.q_range ? Json(range_text(c.q_range->first, c.q_range->second)) : Json(nullptr);
  j["restarts"] = c.restarts;
  j["max_iters"] = c.max_iters;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["tiers"] = {c.tiers.core_cut, c.tiers.semi_cut};
  Json overrides = Json::object();
  for (const auto& [cluster, tier] : c.tiers.overrides) overrides[std::to_string(cluster)] = std::string(tiers::to_string(tier));
  j["tier_overrides"] = overrides;
  j["strength"] = c.strength == tiers::StrengthMeasure::trade_share ? "trade_share" : "retained_degree";
  j["concentration"] = c.concentration;
  j["out"] = c.out.string();
  return j;
}

// Tracks the files a command reads and writes, for its provenance record.
class Stage {
 public:
  Stage(std::string name, const PipelineConfig& config) : name_(std::move(name)), config_(config) {}

  // Upstream artifact inside the output directory; a missing one is a
  // configuration problem, not a runtime failure.
  fs::path artifact(const std::string& file, const std::string& producer) {
    const fs::path p = config_.out / file;
    if (!fs::exists(p)) {
      throw ValidationError("artifact", fmt::format("missing '{}'; run `{}` first", p.string(), producer));
    }
    input(p, file);
    return p;
  }

  void input(const fs::path& p, const std::string& label) { inputs_[label] = io::sha256_file(p); }
  void output(const std::string& file) { outputs_[file] = io::sha256_file(config_.out / file); }
  fs::path path(const std::string& file) const { return config_.out / file; }

  void finish() const {
    Json doc;
    doc["command"] = name_;
    doc["version"] = TRADESBM_VERSION;
    doc["seed"] = config_.seed;
    doc["config"] = config_echo(config_);
    doc["inputs"] = inputs_;
    doc["outputs"] = outputs_;
    io::write_file(config_.out / ("provenance_" + name_ + ".json"), doc.dump(2) + "\n");
  }

 private:
  std::string name_;
  const PipelineConfig& config_;
  std::map<std::string, std::string> inputs_;
  std::map<std::string, std::string> outputs_;
};

std::string kind_name(NetworkKind k) { return std::string(to_string(k)); }
std::string network_stem(NetworkKind k) { return "network_" + kind_name(k); }

sbm::FitOptions fit_options(const PipelineConfig& c) {
  sbm::FitOptions o;
  o.restarts = c.restarts;
  o.max_iters = c.max_iters;
  o.seed = c.seed;
  o.estep.threads = c.threads;
  if (c.threads > 1) o.estep.schedule = sbm::UpdateSchedule::jacobi;
  return o;
}

TemporalNetwork load_network(Stage& stage, NetworkKind k) {
  stage.artifact(network_stem(k) + ".csv", "build");
  stage.artifact(network_stem(k) + ".json", "build");
  return io::read_network(stage.path(network_stem(k)));
}

void cmd_ingest(const PipelineConfig& c) {
  if (!c.input) throw ValidationError("input", "required by `ingest`");
  Stage stage("ingest", c);
  stage.input(*c.input, c.input->string());
  IngestFormat format;
  format.orientation = c.orientation;
  if (c.years) {
    format.first_year = c.years->first;
    format.last_year = c.years->last;
  }
  FlowTable table = load_flow_table(*c.input, format);

  Json doc;
  doc["input"] = c.input->filename().string();
  doc["input_sha256"] = io::sha256_file(*c.input);
  doc["rows_read"] = table.stats.rows_read;
  doc["merged"] = table.stats.merged;
  doc["dropped_zero"] = table.stats.dropped_zero;
  doc["dropped_window"] = table.stats.dropped_window;
  doc["loaded_universe"] = table.universe.size();
  if (c.code_map) {
    stage.input(*c.code_map, c.code_map->string());
    auto h = harmonize_countries(table, load_code_map(*c.code_map), {.strict = c.strict_codes});
    table = std::move(h.table);
    doc["harmonization"] = {{"dropped_retired", h.report.dropped_retired},
                            {"dropped_internal", h.report.dropped_internal},
                            {"dropped_export_value", format_cents(h.report.dropped_export_value)},
                            {"dropped_import_value", format_cents(h.report.dropped_import_value)},
                            {"merged", h.report.merged},
                            {"passthrough", h.report.passthrough}};
  }
  doc["records"] = table.records.size();
  doc["universe"] = table.universe;
  doc["years"] = table.years;
  doc["total_exports"] = format_cents(table.total_exports());
  doc["total_imports"] = format_cents(table.total_imports());

  write_flow_table(stage.path("flows.csv"), table);
  stage.output("flows.csv");
  io::write_file(stage.path("ingest.json"), doc.dump(2) + "\n");
  stage.output("ingest.json");
  stage.finish();
  logger()->info("ingest: {} records, {} countries, {} years", table.records.size(), table.universe.size(),
                 table.years.size());
}

void cmd_build(const PipelineConfig& c) {
  Stage stage("build", c);
  const auto flows = stage.artifact("flows.csv", "ingest");
  const FlowTable table = load_flow_table(flows);
  YearRange range{table.years.front(), table.years.back()};
  if (c.years) range = {std::max(range.first, c.years->first), std::min(range.last, c.years->last)};
  if (range.first > range.last) throw ValidationError("years", "window does not overlap the ingested years");
  const std::string digest = io::sha256_file(flows);
  for (NetworkKind k : c.kinds) {
    TemporalNetwork net = build_network(table, range, k, {.cutoff = c.tau, .keep_isolated = c.keep_isolated});
    net.input_digest = digest;
    io::write_network(stage.path(network_stem(k)), net);
    stage.output(network_stem(k) + ".csv");
    stage.output(network_stem(k) + ".json");
    logger()->info("build {}: {} years, {} retained ties", kind_name(k), net.horizon(), net.retained_ties());
  }
  stage.finish();
}

int recommended_groups(const PipelineConfig& c, Stage& stage, NetworkKind k) {
  if (c.q) return *c.q;
  const std::string file = "recommendation_" + kind_name(k) + ".json";
  if (!fs::exists(stage.path(file))) {
    throw ValidationError("q", fmt::format("required unless '{}' exists (set q or q_range)", file));
  }
  stage.input(stage.path(file), file);
  const Json doc = Json::parse(io::read_file(stage.path(file)));
  if (doc.at("recommended").is_null()) throw Error("sweep for " + kind_name(k) + " produced no usable group count");
  return doc.at("recommended").get<int>();
}

void cmd_fit(const PipelineConfig& c) {
  Stage stage("fit", c);
  for (NetworkKind k : c.kinds) {
    const TemporalNetwork net = load_network(stage, k);
    const int groups = recommended_groups(c, stage, k);
    sbm::FitResult r = sbm::fit(net, groups, fit_options(c));
    const std::string file = "fit_" + kind_name(k) + ".json";
    io::write_fit(stage.path(file), r, net);
    stage.output(file);
    logger()->info("fit {}: Q={} elbo={:.6f} icl={:.6f} iterations={}", kind_name(k), groups, r.elbo, r.icl,
                   r.iterations);
  }
  stage.finish();
}

void cmd_sweep(const PipelineConfig& c) {
  if (!c.q_range) throw ValidationError("q_range", "required by `sweep-q`");
  Stage stage("sweep-q", c);
  for (NetworkKind k : c.kinds) {
    const TemporalNetwork net = load_network(stage, k);
    const auto sweep = sbm::sweep_q(net, c.q_range->first, c.q_range->second, fit_options(c));
    std::string csv = "groups,icl,elbo,status\n";
    for (const auto& row : sweep.rows) {
      if (row.ok) csv += fmt::format("{},{:.17g},{:.17g},ok\n", row.groups, row.icl, row.elbo);
      else csv += fmt::format("{},,,failed\n", row.groups);
    }
    const std::string table = "sweep_" + kind_name(k) + ".csv";
    io::write_file(stage.path(table), csv);
    stage.output(table);

    Json doc;
    doc["kind"] = kind_name(k);
    doc["q_range"] = {c.q_range->first, c.q_range->second};
    doc["recommended"] = sweep.recommended ? Json(*sweep.recommended) : Json(nullptr);
    doc["criterion"] = "icl";
    Json failures = Json::array();
    for (const auto& row : sweep.rows) {
      if (!row.ok) failures.push_back({{"groups", row.groups}, {"error", row.error}});
    }
    doc["failures"] = failures;
    doc["input_sha256"] = net.input_digest;
    const std::string rec = "recommendation_" + kind_name(k) + ".json";
    io::write_file(stage.path(rec), doc.dump(2) + "\n");
    stage.output(rec);
    logger()->info("sweep-q {}: recommended Q={}", kind_name(k),
                   sweep.recommended ? std::to_string(*sweep.recommended) : "none");
  }
  stage.finish();
}

void cmd_metrics(const PipelineConfig& c) {
  Stage stage("metrics", c);
  const metrics::ConcentrationFn conc =
      c.concentration == "entropy" ? metrics::ConcentrationFn(metrics::entropy_concentration)
                                   : metrics::ConcentrationFn(metrics::herfindahl);
  std::vector<metrics::MetricRow> rows;
  for (NetworkKind k : c.kinds) {
    auto part = metrics::network_metrics(load_network(stage, k), conc);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  metrics::write_metrics_csv(stage.path("metrics.csv"), rows);
  stage.output("metrics.csv");
  stage.finish();
}

sbm::FitResult load_fit(Stage& stage, const TemporalNetwork& net, NetworkKind k) {
  return io::read_fit(stage.artifact("fit_" + kind_name(k) + ".json", "fit"), net);
}

void cmd_tiers(const PipelineConfig& c) {
  Stage stage("tiers", c);
  for (NetworkKind k : c.kinds) {
    const TemporalNetwork net = load_network(stage, k);
    const sbm::FitResult r = load_fit(stage, net, k);
    const auto assignment = tiers::assign_all(r.map_labels, r.model.groups, net, c.tiers, c.strength);
    const std::string name = kind_name(k);
    tiers::write_trajectories_csv(stage.path("trajectories_" + name + ".csv"), assignment);
    tiers::write_transitions_csv(stage.path("transitions_" + name + ".csv"), tiers::transition_report(assignment));
    tiers::write_composition_json(stage.path("composition_" + name + ".json"), assignment, r.model.groups);
    stage.output("trajectories_" + name + ".csv");
    stage.output("transitions_" + name + ".csv");
    stage.output("composition_" + name + ".json");
  }
  stage.finish();
}

void cmd_export(const PipelineConfig& c) {
  Stage stage("export", c);
  for (NetworkKind k : c.kinds) {
    const TemporalNetwork net = load_network(stage, k);
    const sbm::FitResult r = load_fit(stage, net, k);
    const std::string name = kind_name(k);
    io::write_labels_csv(stage.path("labels_" + name + ".csv"), r.map_labels, net);
    tiers::write_graphml(stage.path("clusters_" + name + ".graphml"), r.map_labels, r.model.groups, net);
    stage.output("labels_" + name + ".csv");
    stage.output("clusters_" + name + ".graphml");
  }
  stage.finish();
}

void dispatch(const std::string& command, const PipelineConfig& c) {
  if (command == "ingest") return cmd_ingest(c);
  if (command == "build") return cmd_build(c);
  if (command == "fit") return cmd_fit(c);
  if (command == "sweep-q") return cmd_sweep(c);
  if (command == "metrics") return cmd_metrics(c);
  if (command == "tiers") return cmd_tiers(c);
  if (command == "export") return cmd_export(c);
  if (command == "all") {
    cmd_ingest(c);
    cmd_build(c);
    if (c.q_range) cmd_sweep(c);
    cmd_fit(c);
    cmd_metrics(c);
    cmd_tiers(c);
    cmd_export(c);
    return;
  }
  throw ValidationError("command", "unknown command '" + command + "'");
}

void report(const fs::path& out, const Json& doc) {
  const std::string text = doc.dump(2) + "\n";
  std::cerr << text;
  std::error_code ec;
  fs::create_directories(out, ec);
  if (!ec) {
    std::ofstream f(out / "error.json", std::ios::binary);
    f << text;
  }
}

}  // namespace

int run(const std::string& command, const RawConfig& raw) {
  fs::path out = "out";
  if (auto it = raw.find("out"); it != raw.end() && !it->second.empty()) out = it->second;
  try {
    const PipelineConfig config = parse_config(raw);
    fs::create_directories(config.out);
    fs::remove(config.out / "error.json");
    dispatch(command, config);
    return 0;
  } catch (const ValidationError& e) {
    Json errors = Json::array();
    for (const auto& f : e.errors()) errors.push_back({{"field", f.field}, {"message", f.message}});
    report(out, {{"status", "invalid"}, {"command", command}, {"errors", errors}});
    return 2;
  } catch (const std::exception& e) {
    std::string module = "runtime";
    if (dynamic_cast<const InputError*>(&e)) module = "input";
    else if (dynamic_cast<const NumericError*>(&e)) module = "numeric";
    report(out, {{"status", "failed"}, {"command", command}, {"error", {{"type", module}, {"message", e.what()}}}});
    return 1;
  }
}

}  // namespace tradesbm::cli
