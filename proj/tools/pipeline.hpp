#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tradesbm/netbuild.hpp"
#include "tradesbm/tiers.hpp"
#include "tradesbm/trade_ingest.hpp"

namespace tradesbm::cli {

// Flat key/value settings; flags and config file share the key space.
using RawConfig = std::map<std::string, std::string>;

struct FieldError {
  std::string field;
  std::string message;
};

class ValidationError : public std::exception {
 public:
  explicit ValidationError(std::vector<FieldError> errors) : errors_(std::move(errors)) {}
  ValidationError(std::string field, std::string message) : errors_{{std::move(field), std::move(message)}} {}
  const std::vector<FieldError>& errors() const { return errors_; }
  const char* what() const noexcept override { return "invalid configuration"; }

 private:
  std::vector<FieldError> errors_;
};

struct PipelineConfig {
  std::optional<std::filesystem::path> input;
  std::optional<std::filesystem::path> code_map;
  bool strict_codes = false;
  ImportOrientation orientation = ImportOrientation::mirror;
  std::optional<YearRange> years;
  std::vector<NetworkKind> kinds{NetworkKind::X, NetworkKind::I, NetworkKind::NX};
  double tau = kDefaultTieCutoff;
  bool keep_isolated = false;
  std::optional<int> q;
  std::optional<std::pair<int, int>> q_range;
  int restarts = 10;
  int max_iters = 200;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  tiers::TierSpec tiers;
  tiers::StrengthMeasure strength = tiers::StrengthMeasure::trade_share;
  std::string concentration = "hhi";
  std::filesystem::path out = "out";
};

// Recognized keys, for help text and unknown-key checks.
const std::vector<std::string>& config_keys();

// `key = value` lines; '#' starts a comment.
RawConfig read_config_file(const std::filesystem::path& path);

// Parses and validates every field; throws ValidationError listing all
// offending fields at once.
PipelineConfig parse_config(const RawConfig& raw);

const std::vector<std::string>& commands();

// Runs one command (or `all`) and returns the process exit status:
// 0 success, 1 runtime failure, 2 invalid configuration or missing artifact.
// Failures write `error.json` into the output directory and to stderr.
int run(const std::string& command, const RawConfig& raw);

}  // namespace tradesbm::cli
