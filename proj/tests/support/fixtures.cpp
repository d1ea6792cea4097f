#include "fixtures.hpp"

namespace fixture {

using tradesbm::Cents;

tradesbm::FlowTable five_countries(Cents unit) {
  std::vector<tradesbm::FlowRecord> r;
  auto add = [&](const char* from, const char* to, Cents v) { r.push_back({from, to, 2020, v * unit, v * unit}); };
  add("A", "B", 50), add("A", "C", 30), add("A", "D", 16), add("A", "E", 4);
  add("B", "A", 60), add("B", "C", 40);
  add("C", "A", 97), add("C", "B", 3);
  add("D", "A", 25), add("D", "B", 25), add("D", "C", 25), add("D", "E", 25);
  add("E", "A", 96), add("E", "B", 2), add("E", "C", 1), add("E", "D", 1);
  return tradesbm::make_flow_table(std::move(r));
}

const std::map<std::string, HandMetrics>& five_country_metrics() {
  static const std::map<std::string, HandMetrics> m{
      {"A", {0.75, (0.25 + 0.09 + 0.0256) / (0.96 * 0.96), 1.0, 4, 1}},
      {"B", {1.0, 0.36 + 0.16, std::nullopt, 2, 0}},
      {"C", {0.5, 1.0, 1.0, 2, 1}},
      {"D", {1.0, 0.25, std::nullopt, 4, 0}},
      {"E", {0.25, 1.0, 0.375, 4, 3}},
  };
  return m;
}

tradesbm::synthetic::TieredSpec shocked_tiers(std::size_t shock_time) {
  tradesbm::synthetic::TieredSpec spec;
  spec.block_sizes = {5, 10, 10};
  spec.scales = {40.0, 6.0, 2.0};
  spec.years = 5;
  spec.shock_block = 1;
  spec.shock_time = shock_time;
  spec.shock_factor = 0.2;
  return spec;
}

}  // namespace fixture
