#include "tradesbm/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "tradesbm/error.hpp"

namespace tradesbm::io {

using Json = nlohmann::ordered_json;

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 digest failed");
  }
  std::string hex;
  for (unsigned int k = 0; k < len; ++k) hex += fmt::format("{:02x}", md[k]);
  return hex;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << contents;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

namespace {

std::filesystem::path with_ext(std::filesystem::path stem, const char* ext) {
  stem += ext;
  return stem;
}

double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) {
    throw InputError("edge list line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

Json matrix_json(const DenseMatrix& m) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  return rows;
}

DenseMatrix matrix_from(const Json& j, std::size_t n) {
  DenseMatrix m(n, n);
  if (j.size() != n) throw InputError("fit file: matrix has wrong size");
  for (std::size_t r = 0; r < n; ++r) {
    if (j[r].size() != n) throw InputError("fit file: matrix row has wrong size");
    for (std::size_t c = 0; c < n; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

}  // namespace

void write_network(const std::filesystem::path& stem, const TemporalNetwork& net) {
  std::string edges = "year,src,dst,weight\n";
  for (std::size_t t = 0; t < net.horizon(); ++t) {
    for (std::size_t i = 0; i < net.nodes(); ++i) {
      for (std::size_t j = 0; j < net.nodes(); ++j) {
        const double w = net.weight(t, i, j);
        if (w > 0.0) edges += fmt::format("{},{},{},{:.17g}\n", net.years[t], net.universe[i], net.universe[j], w);
      }
    }
  }
  const auto csv = with_ext(stem, ".csv");
  write_file(csv, edges);

  Json doc;
  doc["kind"] = std::string(to_string(net.kind));
  doc["tau"] = net.cutoff;
  doc["universe"] = net.universe;
  doc["years"] = net.years;
  Json presence = Json::array(), totals = Json::array(), traded = Json::array(), removed = Json::array();
  for (std::size_t t = 0; t < net.horizon(); ++t) {
    Json cut = Json::array();
    for (std::size_t i = 0; i < net.slices[t].removed.size(); ++i) {
      for (const auto& r : net.slices[t].removed[i]) cut.push_back(Json::array({i, r.target, r.weight}));
    }
    removed.push_back(cut);
    std::vector<int> p, tr;
    for (std::size_t i = 0; i < net.nodes(); ++i) {
      p.push_back(net.present(t, i) ? 1 : 0);
      tr.push_back(net.slices[t].traded.empty() || !net.slices[t].traded[i] ? 0 : 1);
    }
    presence.push_back(p);
    traded.push_back(tr);
    totals.push_back(net.slices[t].out_total);
  }
  doc["presence"] = presence;
  doc["traded"] = traded;
  doc["out_total"] = totals;
  doc["removed"] = removed;
  doc["edges_file"] = csv.filename().string();
  doc["edges_sha256"] = sha256_hex(edges);
  doc["input_sha256"] = net.input_digest;
  write_file(with_ext(stem, ".json"), doc.dump(2) + "\n");
}

namespace {

TemporalNetwork network_from(const Json& doc, const std::filesystem::path& stem) {
  TemporalNetwork net;
  net.kind = parse_network_kind(doc.at("kind").get<std::string>());
  net.cutoff = doc.at("tau").get<double>();
  net.universe = doc.at("universe").get<std::vector<std::string>>();
  net.years = doc.at("years").get<std::vector<int>>();
  net.input_digest = doc.at("input_sha256").get<std::string>();
  const std::size_t n = net.universe.size(), T = net.years.size();
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[net.universe[i]] = i;
  std::map<int, std::size_t> tindex;
  for (std::size_t t = 0; t < T; ++t) tindex[net.years[t]] = t;

  std::vector<DenseMatrix> weights(T, DenseMatrix(n, n, 0.0));
  const std::string edges = read_file(with_ext(stem, ".csv"));
  if (sha256_hex(edges) != doc.at("edges_sha256").get<std::string>()) {
    throw InputError("edge list '" + with_ext(stem, ".csv").string() + "' does not match its sidecar digest");
  }
  std::istringstream in(edges);
  std::string line;
  std::getline(in, line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() != 4) throw InputError("edge list line " + std::to_string(line_no) + ": expected 4 fields");
    const int year = static_cast<int>(parse_double(f[0], line_no));
    if (!tindex.contains(year) || !index.contains(f[1]) || !index.contains(f[2])) {
      throw InputError("edge list line " + std::to_string(line_no) + ": unknown year or country");
    }
    weights[tindex[year]](index[f[1]], index[f[2]]) = parse_double(f[3], line_no);
  }

  std::vector<std::vector<bool>> presence(T, std::vector<bool>(n));
  const auto& pj = doc.at("presence");
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < n; ++i) presence[t][i] = pj.at(t).at(i).get<int>() != 0;
  }
  const std::string digest = net.input_digest;
  const double cutoff = net.cutoff;
  net = make_temporal_network(net.kind, net.universe, net.years, weights, presence);
  net.input_digest = digest;
  net.cutoff = cutoff;
  for (std::size_t t = 0; t < T; ++t) {
    auto& s = net.slices[t];
    s.cutoff = cutoff;
    s.out_total = doc.at("out_total").at(t).get<std::vector<double>>();
    for (std::size_t i = 0; i < n; ++i) {
      s.active[i] = s.out_total[i] > 0.0;
      s.traded[i] = doc.at("traded").at(t).at(i).get<int>() != 0;
    }
    for (const auto& r : doc.at("removed").at(t)) {
      const auto i = r.at(0).get<std::size_t>(), j = r.at(1).get<std::size_t>();
      if (i >= n || j >= n) throw InputError("network sidecar: removed tie index out of range");
      s.removed[i].push_back({j, r.at(2).get<double>()});
    }
  }
  return net;
}

}  // namespace

TemporalNetwork read_network(const std::filesystem::path& stem) {
  const auto sidecar = with_ext(stem, ".json");
  try {
    return network_from(Json::parse(read_file(sidecar)), stem);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("network sidecar '" + sidecar.string() + "': " + e.what());
  }
}

void write_fit(const std::filesystem::path& path, const sbm::FitResult& r, const TemporalNetwork& net) {
  const auto& m = r.model;
  Json doc;
  doc["kind"] = std::string(to_string(net.kind));
  doc["groups"] = m.groups;
  doc["seed"] = r.seed;
  doc["restarts_tried"] = r.restarts_tried;
  doc["iterations"] = r.iterations;
  doc["converged"] = r.converged;
  doc["elbo"] = r.elbo;
  doc["icl"] = r.icl;
  doc["input_sha256"] = r.input_digest;
  Json model;
  model["alpha"] = m.alpha;
  model["pi"] = matrix_json(m.pi);
  Json beta = Json::array(), mu = Json::array();
  for (std::size_t t = 0; t < m.horizon(); ++t) {
    beta.push_back(matrix_json(m.beta[t]));
    mu.push_back(matrix_json(m.mu[t]));
  }
  model["beta"] = beta;
  model["mu"] = mu;
  model["sigma2"] = m.sigma2;
  doc["model"] = model;
  doc["elbo_trace"] = r.state.elbo_trace;
  Json table = Json::array();
  for (std::size_t t = 0; t < net.horizon(); ++t) {
    std::vector<int> row;
    for (std::size_t i = 0; i < net.nodes(); ++i) row.push_back(r.map_labels(i, t));
    table.push_back(row);
  }
  doc["labels"] = {{"years", net.years}, {"countries", net.universe}, {"table", table}};
  write_file(path, doc.dump(2) + "\n");
}

sbm::FitResult read_fit(const std::filesystem::path& path, const TemporalNetwork& net) {
  sbm::FitResult r;
  try {
    const Json doc = Json::parse(read_file(path));
    auto& m = r.model;
    m.groups = doc.at("groups").get<int>();
    const auto Q = static_cast<std::size_t>(m.groups);
    r.seed = doc.at("seed").get<std::uint64_t>();
    r.restarts_tried = doc.at("restarts_tried").get<int>();
    r.iterations = doc.at("iterations").get<int>();
    r.converged = doc.at("converged").get<bool>();
    r.elbo = doc.at("elbo").get<double>();
    r.icl = doc.at("icl").get<double>();
    r.input_digest = doc.at("input_sha256").get<std::string>();
    const auto& model = doc.at("model");
    m.alpha = model.at("alpha").get<std::vector<double>>();
    m.pi = matrix_from(model.at("pi"), Q);
    for (const auto& b : model.at("beta")) m.beta.push_back(matrix_from(b, Q));
    for (const auto& b : model.at("mu")) m.mu.push_back(matrix_from(b, Q));
    m.sigma2 = model.at("sigma2").get<double>();
    r.state.elbo_trace = doc.at("elbo_trace").get<std::vector<double>>();
    const auto& labels = doc.at("labels");
    if (labels.at("countries").get<std::vector<std::string>>() != net.universe ||
        labels.at("years").get<std::vector<int>>() != net.years) {
      throw InputError("fit file '" + path.string() + "' was made for a different network");
    }
    r.map_labels = Matrix<int>(net.nodes(), net.horizon(), 0);
    for (std::size_t t = 0; t < net.horizon(); ++t) {
      for (std::size_t i = 0; i < net.nodes(); ++i) r.map_labels(i, t) = labels.at("table").at(t).at(i).get<int>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError("fit file '" + path.string() + "': " + e.what());
  }
  return r;
}

void write_labels_csv(const std::filesystem::path& path, const Matrix<int>& labels, const TemporalNetwork& net) {
  std::string out = "year,country,cluster,present\n";
  for (std::size_t t = 0; t < net.horizon(); ++t) {
    for (std::size_t i = 0; i < net.nodes(); ++i) {
      out += fmt::format("{},{},{},{}\n", net.years[t], net.universe[i], labels(i, t), net.present(t, i) ? 1 : 0);
    }
  }
  write_file(path, out);
}

}  // namespace tradesbm::io
