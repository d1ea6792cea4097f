#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "scratch.hpp"
#include "tradesbm/error.hpp"
#include "tradesbm/io.hpp"
#include "tradesbm/synthetic.hpp"

using namespace tradesbm;

namespace {

TemporalNetwork sample_network() {
  auto records = fixture::five_countries().records;
  for (auto r : fixture::five_countries().records) {
    r.year = 2021;
    if (r.reporter != "C") records.push_back(r);  // C exports nothing in 2021
  }
  auto net = build_network(make_flow_table(records), {2020, 2021}, NetworkKind::I);
  net.input_digest = "abc123";
  return net;
}

}  // namespace

TEST(Sha256, KnownDigests) {
  EXPECT_EQ(io::sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(io::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  ScratchDir dir;
  EXPECT_EQ(io::sha256_file(dir.write("f", "abc")), io::sha256_hex("abc"));
  EXPECT_THROW(io::sha256_file(dir / "missing"), InputError);
}

TEST(NetworkFiles, RoundTrip) {
  ScratchDir dir;
  const auto net = sample_network();
  io::write_network(dir / "net", net);
  const auto back = io::read_network(dir / "net");
  EXPECT_EQ(back.kind, net.kind);
  EXPECT_EQ(back.universe, net.universe);
  EXPECT_EQ(back.years, net.years);
  EXPECT_EQ(back.presence, net.presence);
  EXPECT_EQ(back.input_digest, net.input_digest);
  for (std::size_t t = 0; t < net.horizon(); ++t) {
    const auto& a = net.slices[t];
    const auto& b = back.slices[t];
    EXPECT_EQ(b.weights, a.weights);
    EXPECT_EQ(b.out_total, a.out_total);
    EXPECT_EQ(b.active, a.active);
    EXPECT_EQ(b.traded, a.traded);
    EXPECT_EQ(b.cutoff, a.cutoff);
    ASSERT_EQ(b.removed.size(), a.removed.size());
    for (std::size_t i = 0; i < a.removed.size(); ++i) {
      ASSERT_EQ(b.removed[i].size(), a.removed[i].size());
      for (std::size_t k = 0; k < a.removed[i].size(); ++k) {
        EXPECT_EQ(b.removed[i][k].target, a.removed[i][k].target);
        EXPECT_EQ(b.removed[i][k].weight, a.removed[i][k].weight);
      }
    }
  }
  // Writing again is byte-identical.
  const auto csv = io::read_file(dir / "net.csv");
  const auto json = io::read_file(dir / "net.json");
  ScratchDir other;
  io::write_network(other / "net", back);
  EXPECT_EQ(io::read_file(other / "net.csv"), csv);
  EXPECT_EQ(io::read_file(other / "net.json"), json);
}

TEST(NetworkFiles, TamperedEdgesAreRejected) {
  ScratchDir dir;
  io::write_network(dir / "net", sample_network());
  auto csv = io::read_file(dir / "net.csv");
  csv += "2020,A,B,0.5\n";
  io::write_file(dir / "net.csv", csv);
  EXPECT_THROW(io::read_network(dir / "net"), InputError);
}

TEST(NetworkFiles, MalformedSidecar) {
  ScratchDir dir;
  io::write_network(dir / "net", sample_network());
  io::write_file(dir / "net.json", "{\"kind\": \"X\"");
  try {
    io::read_network(dir / "net");
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("net.json"), std::string::npos);
  }
  EXPECT_THROW(io::read_network(dir / "nothing"), InputError);
}

TEST(FitFiles, RoundTrip) {
  synthetic::PlantedSpec spec;
  spec.nodes = 15;
  spec.times = 3;
  spec.groups = 2;
  const auto planted = synthetic::planted_network(spec, 6);
  sbm::FitOptions opts;
  opts.restarts = 2;
  opts.seed = 77;
  const auto r = sbm::fit(planted.net, 2, opts);
  ScratchDir dir;
  io::write_fit(dir / "fit.json", r, planted.net);
  const auto back = io::read_fit(dir / "fit.json", planted.net);
  EXPECT_EQ(back.elbo, r.elbo);
  EXPECT_EQ(back.icl, r.icl);
  EXPECT_EQ(back.seed, r.seed);
  EXPECT_EQ(back.iterations, r.iterations);
  EXPECT_EQ(back.converged, r.converged);
  EXPECT_EQ(back.restarts_tried, r.restarts_tried);
  EXPECT_TRUE(back.map_labels == r.map_labels);
  EXPECT_EQ(back.model.alpha, r.model.alpha);
  EXPECT_TRUE(back.model.pi == r.model.pi);
  EXPECT_EQ(back.model.sigma2, r.model.sigma2);
  for (std::size_t t = 0; t < 3; ++t) {
    EXPECT_TRUE(back.model.beta[t] == r.model.beta[t]);
    EXPECT_TRUE(back.model.mu[t] == r.model.mu[t]);
  }
  EXPECT_EQ(back.state.elbo_trace, r.state.elbo_trace);

  const auto other = synthetic::planted_network(spec, 7);
  auto renamed = other.net;
  renamed.universe[0] = "ZZZ";
  EXPECT_THROW(io::read_fit(dir / "fit.json", renamed), InputError);
}

TEST(LabelsCsv, OneRowPerCellWithPresence) {
  ScratchDir dir;
  const auto net = sample_network();
  Matrix<int> labels(net.nodes(), net.horizon(), 2);
  io::write_labels_csv(dir / "labels.csv", labels, net);
  std::string expected = "year,country,cluster,present\n";
  for (std::size_t t = 0; t < net.horizon(); ++t) {
    for (std::size_t i = 0; i < net.nodes(); ++i) {
      expected += std::to_string(net.years[t]) + "," + net.universe[i] + ",2," + (net.present(t, i) ? "1" : "0") + "\n";
    }
  }
  EXPECT_EQ(io::read_file(dir / "labels.csv"), expected);
}
