#include "tradesbm/tiers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <json.hpp>

#include "tradesbm/error.hpp"

namespace tradesbm::tiers {

std::string_view to_string(Tier tier) {
  switch (tier) {
    case Tier::core: return "core";
    case Tier::semi_periphery: return "semi-periphery";
    case Tier::periphery: return "periphery";
  }
  return "?";
}

Tier parse_tier(std::string_view s) {
  if (s == "core") return Tier::core;
  if (s == "semi-periphery" || s == "SP") return Tier::semi_periphery;
  if (s == "periphery" || s == "PA") return Tier::periphery;
  throw InputError("unknown tier '" + std::string(s) + "'");
}

ClusterRanking rank_clusters(const Matrix<int>& labels, int groups, const TemporalNetwork& net, int year,
                             StrengthMeasure measure) {
  const std::size_t t = net.time_index(year);
  const std::size_t n = net.nodes();
  if (labels.rows() != n || labels.cols() != net.horizon()) throw InputError("labels do not match the network");
  const auto& slice = net.slices[t];

  std::vector<double> strength(n, 0.0);
  if (measure == StrengthMeasure::trade_share) {
    double world = 0.0;
    for (double v : slice.out_total) world += v;
    for (std::size_t i = 0; i < n; ++i) strength[i] = world > 0.0 ? slice.out_total[i] / world : 0.0;
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) strength[i] += slice.weights(i, j) + slice.weights(j, i);
    }
  }

  std::vector<double> total(static_cast<std::size_t>(groups), 0.0);
  std::vector<std::size_t> members(static_cast<std::size_t>(groups), 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!net.present(t, i)) continue;
    const int q = labels(i, t);
    if (q < 1 || q > groups) throw InputError("cluster label out of range");
    total[q - 1] += strength[i];
    ++members[q - 1];
  }

  ClusterRanking ranking;
  ranking.year = year;
  for (int q = 1; q <= groups; ++q) {
    if (members[q - 1] == 0) {
      ranking.empty.push_back(q);
      continue;
    }
    const double score = total[q - 1] / static_cast<double>(members[q - 1]);
    if (!std::isfinite(score)) throw NumericError("non-finite cluster strength");
    ranking.ranked.push_back({q, score, members[q - 1]});
  }
  std::stable_sort(ranking.ranked.begin(), ranking.ranked.end(), [](const ClusterScore& a, const ClusterScore& b) {
    return a.strength != b.strength ? a.strength > b.strength : a.cluster < b.cluster;
  });
  return ranking;
}

ClusterRanking rank_clusters(const sbm::FitResult& result, const TemporalNetwork& net, int year,
                             StrengthMeasure measure) {
  return rank_clusters(result.map_labels, result.model.groups, net, year, measure);
}

std::map<int, Tier> assign_tiers(const ClusterRanking& ranking, const TierSpec& spec) {
  if (!(spec.core_cut > 0.0 && spec.core_cut < spec.semi_cut && spec.semi_cut < 1.0)) {
    throw InputError("tier boundaries must satisfy 0 < core_cut < semi_cut < 1");
  }
  if (ranking.ranked.empty()) throw InputError("cannot assign tiers to an empty ranking");
  for (const auto& [cluster, tier] : spec.overrides) {
    const bool known =
        std::any_of(ranking.ranked.begin(), ranking.ranked.end(), [&](const auto& s) { return s.cluster == cluster; }) ||
        std::find(ranking.empty.begin(), ranking.empty.end(), cluster) != ranking.empty.end();
    if (!known) throw InputError("tier override names unknown cluster " + std::to_string(cluster));
  }
  std::size_t total = 0;
  for (const auto& s : ranking.ranked) total += s.members;

  std::map<int, Tier> out;
  std::size_t before = 0;
  for (const auto& s : ranking.ranked) {
    const double share = static_cast<double>(before) / static_cast<double>(total);
    out[s.cluster] = share < spec.core_cut ? Tier::core : share < spec.semi_cut ? Tier::semi_periphery : Tier::periphery;
    before += s.members;
  }
  for (const auto& [cluster, tier] : spec.overrides) {
    if (out.contains(cluster)) out[cluster] = tier;
  }
  return out;
}

TierAssignment assign_all(const Matrix<int>& labels, int groups, const TemporalNetwork& net, const TierSpec& spec,
                          StrengthMeasure measure) {
  TierAssignment a;
  a.universe = net.universe;
  a.years = net.years;
  a.spec = spec;
  const std::size_t n = net.nodes();
  a.cluster = Matrix<int>(n, net.horizon(), 0);
  a.tier.assign(n, std::vector<std::optional<Tier>>(net.horizon()));
  for (std::size_t t = 0; t < net.horizon(); ++t) {
    ClusterRanking ranking = rank_clusters(labels, groups, net, net.years[t], measure);
    if (ranking.ranked.empty()) {
      a.rankings.push_back(std::move(ranking));
      continue;
    }
    const auto tiers = assign_tiers(ranking, spec);
    for (std::size_t i = 0; i < n; ++i) {
      if (!net.present(t, i)) continue;
      a.cluster(i, t) = labels(i, t);
      a.tier[i][t] = tiers.at(labels(i, t));
    }
    a.rankings.push_back(std::move(ranking));
  }
  return a;
}

TierAssignment assign_all(const sbm::FitResult& result, const TemporalNetwork& net, const TierSpec& spec,
                          StrengthMeasure measure) {
  return assign_all(result.map_labels, result.model.groups, net, spec, measure);
}

std::vector<TrajectoryPoint> trajectory(const TierAssignment& assignments, const std::string& country) {
  auto it = std::find(assignments.universe.begin(), assignments.universe.end(), country);
  if (it == assignments.universe.end()) throw InputError("unknown country '" + country + "'");
  const auto i = static_cast<std::size_t>(it - assignments.universe.begin());
  std::vector<TrajectoryPoint> out;
  for (std::size_t t = 0; t < assignments.years.size(); ++t) {
    TrajectoryPoint p;
    p.year = assignments.years[t];
    p.present = assignments.tier[i][t].has_value();
    p.cluster = assignments.cluster(i, t);
    p.tier = assignments.tier[i][t];
    out.push_back(p);
  }
  return out;
}

TransitionReport transition_report(const TierAssignment& assignments) {
  TransitionReport report;
  for (std::size_t i = 0; i < assignments.universe.size(); ++i) {
    std::optional<Tier> last;
    for (std::size_t t = 0; t < assignments.years.size(); ++t) {
      const auto& tier = assignments.tier[i][t];
      if (!tier) continue;
      if (last && *last != *tier) {
        report.rows.push_back({assignments.universe[i], assignments.years[t], *last, *tier});
        ++report.counts[{*last, *tier}];
      }
      last = tier;
    }
  }
  std::stable_sort(report.rows.begin(), report.rows.end(), [](const Transition& a, const Transition& b) {
    return a.year != b.year ? a.year < b.year : a.country < b.country;
  });
  return report;
}

DenseMatrix cluster_weights(const Matrix<int>& labels, int groups, const TemporalNetwork& net, std::size_t t) {
  const auto Q = static_cast<std::size_t>(groups);
  DenseMatrix w(Q, Q, 0.0);
  for (std::size_t i = 0; i < net.nodes(); ++i) {
    if (!net.present(t, i)) continue;
    for (std::size_t j = 0; j < net.nodes(); ++j) {
      const double x = net.weight(t, i, j);
      if (x > 0.0 && net.present(t, j)) w(labels(i, t) - 1, labels(j, t) - 1) += x;
    }
  }
  return w;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

void write_trajectories_csv(const std::filesystem::path& path, const TierAssignment& a) {
  auto out = open_out(path);
  out << "country,year,present,cluster,tier\n";
  for (const auto& country : a.universe) {
    for (const auto& p : trajectory(a, country)) {
      out << country << ',' << p.year << ',' << (p.present ? 1 : 0) << ',';
      if (p.present) out << p.cluster << ',' << to_string(*p.tier);
      else out << ',';
      out << '\n';
    }
  }
}

void write_transitions_csv(const std::filesystem::path& path, const TransitionReport& report) {
  auto out = open_out(path);
  out << "country,year,from_tier,to_tier\n";
  for (const auto& r : report.rows) {
    out << r.country << ',' << r.year << ',' << to_string(r.from) << ',' << to_string(r.to) << '\n';
  }
}

void write_composition_json(const std::filesystem::path& path, const TierAssignment& a, int groups) {
  nlohmann::ordered_json doc;
  doc["groups"] = groups;
  doc["tier_spec"] = {{"core_cut", a.spec.core_cut},
                      {"semi_cut", a.spec.semi_cut},
                      {"note", "cut points on cumulative membership share are a convention, not an estimate"}};
  nlohmann::ordered_json years = nlohmann::ordered_json::array();
  for (std::size_t t = 0; t < a.years.size(); ++t) {
    nlohmann::ordered_json clusters = nlohmann::ordered_json::array();
    const auto& ranking = a.rankings[t];
    for (std::size_t r = 0; r < ranking.ranked.size(); ++r) {
      const auto& s = ranking.ranked[r];
      std::vector<std::string> members;
      std::optional<Tier> tier;
      for (std::size_t i = 0; i < a.universe.size(); ++i) {
        if (a.cluster(i, t) == s.cluster) {
          members.push_back(a.universe[i]);
          tier = a.tier[i][t];
        }
      }
      clusters.push_back({{"cluster", s.cluster},
                          {"period_label", static_cast<int>(t) * groups + s.cluster},
                          {"rank", r + 1},
                          {"strength", s.strength},
                          {"tier", tier ? std::string(to_string(*tier)) : std::string()},
                          {"members", members}});
    }
    years.push_back({{"year", a.years[t]}, {"clusters", clusters}, {"empty_clusters", ranking.empty}});
  }
  doc["years"] = years;
  open_out(path) << doc.dump(2) << '\n';
}

void write_graphml(const std::filesystem::path& path, const Matrix<int>& labels, int groups,
                   const TemporalNetwork& net) {
  auto out = open_out(path);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
      << "  <key id=\"members\" for=\"node\" attr.name=\"members\" attr.type=\"int\"/>\n"
      << "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n";
  const auto Q = static_cast<std::size_t>(groups);
  for (std::size_t t = 0; t < net.horizon(); ++t) {
    const int year = net.years[t];
    const DenseMatrix w = cluster_weights(labels, groups, net, t);
    std::vector<int> members(Q, 0);
    for (std::size_t i = 0; i < net.nodes(); ++i) {
      if (net.present(t, i)) ++members[labels(i, t) - 1];
    }
    out << "  <graph id=\"y" << year << "\" edgedefault=\"directed\">\n";
    for (std::size_t q = 0; q < Q; ++q) {
      out << "    <node id=\"y" << year << "c" << q + 1 << "\"><data key=\"members\">" << members[q]
          << "</data></node>\n";
    }
    for (std::size_t q = 0; q < Q; ++q) {
      for (std::size_t l = 0; l < Q; ++l) {
        if (w(q, l) <= 0.0) continue;
        out << "    <edge source=\"y" << year << "c" << q + 1 << "\" target=\"y" << year << "c" << l + 1
            << "\"><data key=\"weight\">" << fmt::format("{:.17g}", w(q, l)) << "</data></edge>\n";
      }
    }
    out << "  </graph>\n";
  }
  out << "</graphml>\n";
}

}  // namespace tradesbm::tiers
