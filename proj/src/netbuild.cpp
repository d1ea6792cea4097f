#include "tradesbm/netbuild.hpp"

#include <algorithm>

#include "tradesbm/error.hpp"

namespace tradesbm {

std::size_t WeightedNet::retained_ties() const {
  return static_cast<std::size_t>(
      std::count_if(weights.data().begin(), weights.data().end(), [](double w) { return w > 0.0; }));
}

std::size_t WeightedNet::removed_ties() const {
  std::size_t total = 0;
  for (const auto& r : removed) total += r.size();
  return total;
}

FlowMatrix net_exports(const FlowMatrix& exports, const FlowMatrix& imports) {
  if (exports.year != imports.year) throw InputError("net_exports: year mismatch");
  if (exports.universe != imports.universe) throw InputError("net_exports: universe mismatch");
  const std::size_t n = exports.values.rows();
  FlowMatrix nx;
  nx.values = DenseMatrix(n, n, 0.0);
  nx.year = exports.year;
  nx.kind = NetworkKind::NX;
  nx.universe = exports.universe;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) nx.values(i, j) = std::max(exports.values(i, j) - imports.values(i, j), 0.0);
    }
  }
  return nx;
}

WeightedNet normalize_rows(const FlowMatrix& flows) {
  const std::size_t n = flows.values.rows();
  WeightedNet net;
  net.weights = DenseMatrix(n, n, 0.0);
  net.year = flows.year;
  net.kind = flows.kind;
  net.universe = flows.universe;
  net.active.assign(n, false);
  net.out_total.assign(n, 0.0);
  net.removed.assign(n, {});

  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (flows.values(i, i) != 0.0) throw InputError("flow matrix has a nonzero diagonal entry");
    double sum = 0.0;
    for (double v : flows.values.row(i)) {
      if (v < 0.0) throw InputError("flow matrix has a negative entry");
      sum += v;
    }
    net.out_total[i] = sum;
    if (sum > 0.0) {
      any = true;
      net.active[i] = true;
      for (std::size_t j = 0; j < n; ++j) net.weights(i, j) = flows.values(i, j) / sum;
    }
  }
  if (!any) {
    throw InputError("no trade recorded for " + std::string(to_string(flows.kind)) + " in " +
                     std::to_string(flows.year));
  }
  net.traded = active_set(flows);
  return net;
}

WeightedNet threshold(const WeightedNet& net, double cutoff) {
  if (!(cutoff >= 0.0 && cutoff < 1.0)) throw InputError("tie cutoff must lie in [0, 1)");
  WeightedNet out = net;
  out.cutoff = cutoff;
  const std::size_t n = out.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double& w = out.weights(i, j);
      if (w > 0.0 && w < cutoff) {
        out.removed[i].push_back({j, w});
        w = 0.0;
      }
    }
  }
  return out;
}

std::vector<bool> presence_mask(const WeightedNet& slice, bool keep_isolated) {
  const std::size_t n = slice.size();
  std::vector<bool> present(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (slice.weights(i, j) > 0.0) {
        present[i] = true;
        present[j] = true;
      }
    }
  }
  if (keep_isolated) {
    for (std::size_t i = 0; i < n; ++i) {
      if (i < slice.traded.size() && slice.traded[i]) present[i] = true;
    }
  }
  return present;
}

std::size_t TemporalNetwork::retained_ties() const {
  std::size_t total = 0;
  for (const auto& s : slices) total += s.retained_ties();
  return total;
}

std::size_t TemporalNetwork::index_of(const std::string& country) const {
  auto it = std::find(universe.begin(), universe.end(), country);
  if (it == universe.end()) throw InputError("country '" + country + "' not in network universe");
  return static_cast<std::size_t>(it - universe.begin());
}

std::size_t TemporalNetwork::time_index(int year) const {
  auto it = std::find(years.begin(), years.end(), year);
  if (it == years.end()) throw InputError("year " + std::to_string(year) + " outside network horizon");
  return static_cast<std::size_t>(it - years.begin());
}

void TemporalNetwork::validate() const {
  if (years.empty()) throw InputError("temporal network has no slices");
  if (slices.size() != years.size() || presence.size() != years.size()) {
    throw InputError("temporal network slice count mismatch");
  }
  const std::size_t n = universe.size();
  for (std::size_t t = 0; t < slices.size(); ++t) {
    const auto& s = slices[t];
    if (s.universe != universe || s.weights.rows() != n || s.weights.cols() != n || presence[t].size() != n) {
      throw InputError("slice " + std::to_string(years[t]) + " disagrees with the network universe");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (s.weights(i, i) != 0.0) throw InputError("slice " + std::to_string(years[t]) + " has a self-tie");
      for (double w : s.weights.row(i)) {
        if (!(w >= 0.0 && w <= 1.0)) throw InputError("slice " + std::to_string(years[t]) + " weight outside [0, 1]");
      }
    }
  }
}

TemporalNetwork build_network(const FlowTable& table, YearRange years, NetworkKind kind,
                              const BuildOptions& options) {
  if (years.last < years.first) throw InputError("empty year range");
  TemporalNetwork net;
  net.kind = kind;
  net.universe = table.universe;
  net.cutoff = options.cutoff;
  for (int year = years.first; year <= years.last; ++year) {
    if (!table.has_year(year)) throw InputError("year " + std::to_string(year) + " not present in flow table");
    FlowMatrix flows = [&] {
      switch (kind) {
        case NetworkKind::X: return yearly_flow_matrix(table, year, Direction::exports);
        case NetworkKind::I: return yearly_flow_matrix(table, year, Direction::imports);
        case NetworkKind::NX:
          return net_exports(yearly_flow_matrix(table, year, Direction::exports),
                             yearly_flow_matrix(table, year, Direction::imports));
      }
      throw InputError("unknown network kind");
    }();
    flows.kind = kind;
    WeightedNet slice = threshold(normalize_rows(flows), options.cutoff);
    net.presence.push_back(presence_mask(slice, options.keep_isolated));
    net.slices.push_back(std::move(slice));
    net.years.push_back(year);
  }
  return net;
}

std::map<NetworkKind, TemporalNetwork> build_networks(const FlowTable& table, YearRange years,
                                                      const std::set<NetworkKind>& kinds,
                                                      const BuildOptions& options) {
  if (kinds.empty()) throw InputError("no network kinds requested");
  std::map<NetworkKind, TemporalNetwork> out;
  for (NetworkKind k : kinds) out.emplace(k, build_network(table, years, k, options));
  return out;
}

TemporalNetwork make_temporal_network(NetworkKind kind, std::vector<std::string> universe, std::vector<int> years,
                                      const std::vector<DenseMatrix>& weights,
                                      std::vector<std::vector<bool>> presence) {
  if (weights.size() != years.size()) throw InputError("one weight slice per year required");
  TemporalNetwork net;
  net.kind = kind;
  net.universe = std::move(universe);
  net.years = std::move(years);
  const std::size_t n = net.universe.size();
  for (std::size_t t = 0; t < weights.size(); ++t) {
    WeightedNet s;
    s.weights = weights[t];
    s.year = net.years[t];
    s.kind = kind;
    s.universe = net.universe;
    s.cutoff = net.cutoff;
    s.active.assign(n, false);
    s.traded.assign(n, false);
    s.out_total.assign(n, 0.0);
    s.removed.assign(n, {});
    if (s.weights.rows() != n || s.weights.cols() != n) throw InputError("weight slice has wrong dimensions");
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double w = s.weights(i, j);
        if (w > 0.0) {
          s.out_total[i] += w;
          s.active[i] = true;
          s.traded[i] = true;
          s.traded[j] = true;
        }
      }
    }
    if (presence.size() <= t) presence.push_back(presence_mask(s, false));
    net.slices.push_back(std::move(s));
  }
  net.presence = std::move(presence);
  net.validate();
  return net;
}

}  // namespace tradesbm
