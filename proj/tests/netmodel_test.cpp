// Copyright 2026 The Coalmux Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "coalmux/netmodel.hpp"

#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "coalmux/io.hpp"
#include "coalmux/quality.hpp"
#include "coalmux/synth.hpp"
#include "test_util.hpp"

namespace coalmux {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() / fmt::format("coalmux_{}_{}", info->test_suite_name(), info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path_ / name) << text;
    return path_ / name;
  }

 private:
  fs::path path_;
};

void write_basic(const TempDir& dir, const std::string& edges) {
  dir.write("vertices.csv", "id,name,actor_type,power\na,\"Org A, Ltd\",ngo,1.5\nb,B,state,0\nc,C,firm,2\n");
  dir.write("layers.csv", "layer_id,mode,time\nRes/T0,Res,0\n");
  dir.write("edges.csv", "layer_id,source,target,weight\n" + edges);
}

TEST(Canonicalize, RelabelsByFirstAppearance) {
  MultilayerPartition p{{{5, 5, 9}}};
  EXPECT_EQ(canonicalize(p).labels, (std::vector<std::vector<Label>>{{0, 0, 1}}));
  const auto once = canonicalize(MultilayerPartition{{{3, 1, 3}, {1, 7}}});
  EXPECT_EQ(canonicalize(once).labels, once.labels);
  EXPECT_TRUE(canonicalize(MultilayerPartition{{{}}}).labels[0].empty());
}

TEST(Canonicalize, PreservesCoAssignment) {
  CounterRng rng(2);
  MultilayerPartition p;
  for (int l = 0; l < 3; ++l) {
    std::vector<Label> g(12);
    for (auto& x : g) x = static_cast<Label>(rng.below(5)) * 3 + 7;
    p.labels.push_back(g);
  }
  const auto c = canonicalize(p);
  for (std::size_t l1 = 0; l1 < 3; ++l1) {
    for (std::size_t l2 = 0; l2 < 3; ++l2) {
      for (std::size_t i = 0; i < 12; ++i) {
        for (std::size_t j = 0; j < 12; ++j) {
          EXPECT_EQ(p.labels[l1][i] == p.labels[l2][j], c.labels[l1][i] == c.labels[l2][j]);
        }
      }
    }
  }
}

TEST(Layer, DensityMatchesHandCount) {
  // 96 participants with 437 edges: 437 / (96 * 95 / 2).
  std::vector<VertexIndex> parts(96);
  for (VertexIndex i = 0; i < 96; ++i) parts[i] = i;
  std::vector<std::tuple<VertexIndex, VertexIndex, double>> edges;
  for (VertexIndex i = 0; i < 96 && edges.size() < 437; ++i) {
    for (VertexIndex j = i + 1; j < 96 && edges.size() < 437; ++j) edges.emplace_back(i, j, 1.0);
  }
  const auto layer = Layer::make("x", {"Res", 0}, parts, edges);
  EXPECT_DOUBLE_EQ(layer.density(), 437.0 / 4560.0);
}

TEST(Layer, RejectsInvalidEdges) {
  const std::vector<VertexIndex> parts{0, 1, 2};
  using E = std::vector<std::tuple<VertexIndex, VertexIndex, double>>;
  EXPECT_THROW(Layer::make("x", {"M", 0}, parts, E{{1, 1, 1.0}}), DataError);
  EXPECT_THROW(Layer::make("x", {"M", 0}, parts, E{{0, 1, 0.0}}), DataError);
  EXPECT_THROW(Layer::make("x", {"M", 0}, parts, E{{0, 5, 1.0}}), DataError);
  EXPECT_THROW(Layer::make("x", {"M", 0}, parts, E{{0, 1, 1.0}, {1, 0, 2.0}}), DataError);
  EXPECT_THROW(Layer::make("x", {"M", 0}, {0, 0}, E{}), DataError);
}

TEST(Network, DefaultCouplingIsAllPairs) {
  auto net = testing::make_network(3, std::vector<testing::EdgeList>(6));
  EXPECT_EQ(net.couplings().size(), 15u);
  std::vector<LayerId> ids;
  for (int t = 0; t < 2; ++t) {
    for (const char* m : {"Res", "Dis", "Com"}) ids.push_back({m, t});
  }
  auto temporal = testing::make_network(3, std::vector<testing::EdgeList>(6), {}, ids);
  EXPECT_EQ(temporal.topology_pairs(CouplingTopology::kTemporal).size(), 3u);
  EXPECT_THROW(testing::make_network(3, {{}, {}}, {}, {{"M", 0}, {"M", 0}}), DataError);
}

TEST(Registry, RejectsBadEntries) {
  VertexRegistry reg;
  reg.add({"a", "A", "x", 1.0});
  EXPECT_THROW(reg.add({"a", "A2", "x", 1.0}), DataError);
  EXPECT_THROW(reg.add({"", "E", "x", 1.0}), DataError);
  EXPECT_THROW(reg.add({"n", "N", "x", -1.0}), DataError);
}

TEST(LoadNetwork, DefaultParticipationFollowsEdges) {
  TempDir dir;
  write_basic(dir, "Res/T0,a,b,1.0\n");
  const auto net = load_network(dir.path());
  ASSERT_EQ(net.layer_count(), 1u);
  EXPECT_EQ(net.layer(0).size(), 2u);
  EXPECT_EQ(net.registry()[0].name, "Org A, Ltd");
}

TEST(LoadNetwork, ParticipationFileAddsIsolates) {
  TempDir dir;
  write_basic(dir, "Res/T0,a,b,1.0\n");
  dir.write("participation.csv", "layer_id,vertex_id\nRes/T0,a\nRes/T0,b\nRes/T0,c\n");
  const auto net = load_network(dir.path());
  EXPECT_EQ(net.layer(0).size(), 3u);
  EXPECT_EQ(net.layer(0).degrees()[2], 0u);
}

TEST(LoadNetwork, ErrorsCarryFileAndLine) {
  TempDir dir;
  auto expect_error = [&](const std::string& edges, const std::string& needle) {
    write_basic(dir, edges);
    try {
      load_network(dir.path());
      ADD_FAILURE() << "no error for " << edges;
    } catch (const DataError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  expect_error("Res/T0,a,a,1.0\n", "edges.csv:2: self-loop");
  expect_error("Res/T0,a,b,1.0\nRes/T0,b,a,1.0\n", "edges.csv:3: duplicate edge");
  expect_error("Res/T0,a,z,1.0\n", "edges.csv:2: unknown vertex 'z'");
  expect_error("Res/T0,a,b,-1\n", "edges.csv:2: weight must be > 0");
  expect_error("Res/T0,a,b\n", "edges.csv:2: expected 4 fields");
  expect_error("Res/T0,a,b,x\n", "edges.csv:2: weight 'x' is not a number");
  expect_error("Dis/T0,a,b,1\n", "unknown layer 'Dis/T0'");
  dir.write("edges.csv", "layer,source,target,weight\n");
  EXPECT_THROW(load_network(dir.path()), DataError);
}

TEST(Csv, QuotesAndComments) {
  const auto t = parse_csv("# note\nx,y\n\"a,\"\"b\"\"\",2\n\"multi\nline\",3\n", "t.csv");
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0].fields[0], "a,\"b\"");
  EXPECT_EQ(t.rows[1].fields[0], "multi\nline");
  EXPECT_EQ(t.rows[1].line, 4u);
  EXPECT_THROW(parse_csv("x\n\"open\n", "t.csv"), DataError);
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
}

TEST(SaveNetwork, RoundTripIsIdentity) {
  TempDir dir;
  auto spec = case_preset();
  spec.seed = 3;
  spec.participation = 0.8;
  const auto net = generate(spec).network;
  save_network(net, dir.path(), {"generated"});
  const auto back = load_network(dir.path());
  EXPECT_TRUE(back == net);
  const auto temporal = net.with_couplings(net.topology_pairs(CouplingTopology::kTemporal));
  save_network(temporal, dir.path());
  EXPECT_TRUE(load_network(dir.path()) == temporal);
}

TEST(PartitionFile, RoundTripAndStableBytes) {
  TempDir dir;
  auto spec = case_preset();
  spec.seed = 5;
  const auto s = generate(spec);
  auto params = ModelParams::uniform(s.network, 1.1, 0.35, 3);
  params.k_max[2] = 0;
  const auto scores = total_loglik(s.network, s.truth);
  const auto doc = make_document(s.network, s.truth, params, scores, Json{{"seed", 5}});
  save_partition(doc, dir.path() / "a.json");
  save_partition(doc, dir.path() / "b.json");
  EXPECT_EQ(read_text(dir.path() / "a.json"), read_text(dir.path() / "b.json"));
  const auto back = load_partition(dir.path() / "a.json");
  EXPECT_TRUE(back == doc);
  EXPECT_FALSE(back.k_max.at(s.network.layer(2).key()).has_value());
  const auto bound = bind(back, s.network);
  EXPECT_EQ(bound.partition.labels, s.truth.labels);
  EXPECT_TRUE(bound.params == params);
}

TEST(PartitionFile, RejectsTamperedDocuments) {
  TempDir dir;
  auto net = testing::make_network(3, {{{0, 1}}});
  MultilayerPartition part{{{0, 0, 1}}};
  const auto doc = make_document(net, part, ModelParams::uniform(net, 1.0, 0.0), total_loglik(net, part));
  auto j = to_json(doc);
  j["version"] = 99;
  EXPECT_THROW(document_from_json(j), DataError);
  j = to_json(doc);
  j["params"].erase("gamma");
  EXPECT_THROW(document_from_json(j), DataError);
  j = to_json(doc);
  j["params"]["k_max"]["L0"] = 0;
  EXPECT_THROW(document_from_json(j), DataError);
  auto missing = doc;
  missing.assignments["L0"].erase("v2");
  EXPECT_THROW(bind(missing, net), DataError);
  dir.write("bad.json", "{not json");
  EXPECT_THROW(load_partition(dir.path() / "bad.json"), DataError);
}

}  // namespace
}  // namespace coalmux
