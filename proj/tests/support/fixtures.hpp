#pragma once

#include <map>
#include <optional>
#include <string>

#include "tradesbm/trade_ingest.hpp"
#include "tradesbm/synthetic.hpp"

namespace fixture {

// Five exporters in one year (2020), values in cents. Shares per exporter:
//   A: .50 .30 .16 .04      B: .60 .40
//   C: .97 .03              D: .25 .25 .25 .25
//   E: .96 .02 .01 .01
tradesbm::FlowTable five_countries(tradesbm::Cents unit = 1);

struct HandMetrics {
  double ratio;                      // (m - delta) / m
  std::optional<double> hhi_kept;    // retained shares, renormalized
  std::optional<double> hhi_removed;
  std::size_t m;
  std::size_t delta;
};

// Worked by hand from the shares above.
const std::map<std::string, HandMetrics>& five_country_metrics();
inline constexpr double kFiveCountryWorld = 3.5 / 5.0;

// Strength-ordered three-block trade table whose middle block loses 80% of
// its exports from `shock_time` on.
tradesbm::synthetic::TieredSpec shocked_tiers(std::size_t shock_time);

}  // namespace fixture
