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

#include "coalmux/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <gtest/gtest.h>

namespace coalmux {
namespace {

std::set<Label> distinct(const std::vector<Label>& g) { return {g.begin(), g.end()}; }

std::vector<Label> full_labels(const SyntheticNetwork& s, LayerIndex l) {
  std::vector<Label> out(s.network.registry().size(), -1);
  const auto& layer = s.network.layer(l);
  for (std::uint32_t p = 0; p < layer.size(); ++p) out[layer.vertex(p)] = s.truth.labels[l][p];
  return out;
}

TEST(Synth, PillarRepeatsLabelsEverywhere) {
  SyntheticSpec spec;
  spec.seed = 4;
  const auto s = generate(spec);
  ASSERT_EQ(s.network.layer_count(), 6u);
  EXPECT_EQ(s.network.layer(0).key(), "Res/T0");
  EXPECT_EQ(s.network.layer(4).key(), "Dis/T1");
  for (LayerIndex l = 1; l < 6; ++l) EXPECT_EQ(s.truth.labels[l], s.truth.labels[0]);
  check_domain(s.network, s.truth);
}

TEST(Synth, HierarchySplitsSelectedModes) {
  SyntheticSpec spec;
  spec.k = 2;
  spec.structure = Structure::kHierarchy;
  spec.split_layers = {"Dis"};
  spec.seed = 1;
  const auto s = generate(spec);
  for (LayerIndex l = 0; l < s.network.layer_count(); ++l) {
    const bool split = s.network.layer(l).id().mode == "Dis";
    EXPECT_EQ(distinct(s.truth.labels[l]).size(), split ? 4u : 2u) << s.network.layer(l).key();
  }
  // Children keep every other member; parents keep the rest.
  const auto res = full_labels(s, 0);
  const auto dis = full_labels(s, 1);
  for (std::size_t v = 0; v < res.size(); ++v) EXPECT_EQ(dis[v] % 2, res[v]);
}

TEST(Synth, WithinCommunityEdgeCountMatchesBinomialMoments) {
  SyntheticSpec spec;
  spec.n = 40;
  spec.modes = 1;
  spec.slices = 1;
  double observed = 0.0, expected = 0.0, variance = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    spec.seed = seed;
    const auto s = generate(spec);
    const auto& layer = s.network.layer(0);
    const auto& g = s.truth.labels[0];
    std::vector<double> sizes(static_cast<std::size_t>(spec.k), 0.0);
    for (Label c : g) sizes[static_cast<std::size_t>(c)] += 1.0;
    double pairs = 0.0;
    for (double nc : sizes) pairs += nc * (nc - 1.0) / 2.0;
    expected += spec.p_in * pairs;
    variance += pairs * spec.p_in * (1.0 - spec.p_in);
    for (const auto& e : layer.edges()) observed += g[e.a] == g[e.b];
  }
  EXPECT_LE(std::abs(observed - expected), 3.0 * std::sqrt(variance));
}

TEST(Synth, PresetShapeAndDensities) {
  auto spec = case_preset();
  EXPECT_EQ(spec.k, 3);
  EXPECT_EQ(spec.modes * spec.slices, 6);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    spec.seed = seed;
    const auto s = generate(spec);
    ASSERT_EQ(s.network.layer_count(), 6u);
    for (const auto& layer : s.network.layers()) {
      EXPECT_GE(layer.density(), 0.05);
      EXPECT_LE(layer.density(), 0.20);
    }
  }
}

TEST(Synth, Deterministic) {
  auto spec = case_preset();
  spec.seed = 12;
  const auto a = generate(spec);
  const auto b = generate(spec);
  EXPECT_EQ(a.truth.labels, b.truth.labels);
  for (LayerIndex l = 0; l < 6; ++l) {
    const auto pa = a.network.layer(l).participants();
    const auto pb = b.network.layer(l).participants();
    EXPECT_TRUE(std::equal(pa.begin(), pa.end(), pb.begin(), pb.end()));
    EXPECT_EQ(a.network.layer(l).edges().size(), b.network.layer(l).edges().size());
  }
  spec.seed = 13;
  EXPECT_NE(generate(spec).truth.labels, a.truth.labels);
}

TEST(Synth, SemipillarAtFullParticipationIsPillar) {
  SyntheticSpec spec;
  spec.seed = 8;
  const auto pillar = generate(spec);
  spec.structure = Structure::kSemipillar;
  const auto semi = generate(spec);
  EXPECT_EQ(pillar.truth.labels, semi.truth.labels);
  for (LayerIndex l = 0; l < 6; ++l) {
    const auto& a = pillar.network.layer(l).edges();
    const auto& b = semi.network.layer(l).edges();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t e = 0; e < a.size(); ++e) EXPECT_TRUE(a[e].a == b[e].a && a[e].b == b[e].b);
  }
  spec.participation = 0.7;
  const auto partial = generate(spec);
  for (const auto& layer : partial.network.layers()) EXPECT_LT(layer.size(), 60u);
}

TEST(Synth, CopyProbabilityControlsPersistence) {
  SyntheticSpec spec;
  spec.modes = 1;
  spec.slices = 3;
  spec.copy_p = 1.0;
  const auto kept = generate(spec);
  EXPECT_EQ(kept.truth.labels[0], kept.truth.labels[2]);

  // copy_p = 0: pooled chi-square of slice 0 vs slice 1 labels, df = 4.
  spec.copy_p = 0.0;
  spec.slices = 2;
  spec.n = 200;
  std::vector<std::vector<double>> table(3, std::vector<double>(3, 0.0));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    spec.seed = seed;
    const auto s = generate(spec);
    for (std::size_t v = 0; v < 200; ++v) {
      table[static_cast<std::size_t>(s.truth.labels[0][v])][static_cast<std::size_t>(s.truth.labels[1][v])] += 1.0;
    }
  }
  std::vector<double> rows(3, 0.0), cols(3, 0.0);
  double total = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      rows[i] += table[i][j];
      cols[j] += table[i][j];
      total += table[i][j];
    }
  }
  double chi2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double e = rows[i] * cols[j] / total;
      chi2 += (table[i][j] - e) * (table[i][j] - e) / e;
    }
  }
  EXPECT_LT(chi2, 13.2767);
}

TEST(Synth, OverlapRelabelsPerLayer) {
  SyntheticSpec spec;
  spec.structure = Structure::kOverlap;
  spec.relabel_q = 0.3;
  spec.n = 200;
  const auto s = generate(spec);
  std::size_t differ = 0;
  for (std::size_t v = 0; v < 200; ++v) differ += s.truth.labels[0][v] != s.truth.labels[1][v];
  // Expected share of changed labels: 1 - (0.7 + 0.3/3)^2 - ... about 0.36.
  EXPECT_GT(differ, 40u);
  EXPECT_LT(differ, 110u);
}

TEST(Synth, TemporalCouplingOption) {
  SyntheticSpec spec;
  spec.coupling = CouplingTopology::kTemporal;
  const auto s = generate(spec);
  EXPECT_EQ(s.network.couplings().size(), 3u);
}

TEST(Synth, RejectsBadSpecs) {
  SyntheticSpec spec;
  spec.p_out = 0.5;
  spec.p_in = 0.4;
  EXPECT_THROW(generate(spec), UsageError);
  spec = SyntheticSpec{};
  spec.k = 0;
  EXPECT_THROW(generate(spec), UsageError);
  spec = SyntheticSpec{};
  spec.copy_p = 1.5;
  EXPECT_THROW(generate(spec), UsageError);
  spec = SyntheticSpec{};
  spec.copy_p_schedule = {1.0};
  EXPECT_THROW(generate(spec), UsageError);
  EXPECT_THROW(parse_structure("tree"), UsageError);
  EXPECT_EQ(parse_structure(to_string(Structure::kHierarchy)), Structure::kHierarchy);
}

}  // namespace
}  // namespace coalmux
