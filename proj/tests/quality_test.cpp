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

#include "coalmux/quality.hpp"

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace coalmux {
namespace {

using testing::cliques;
using testing::make_network;

// Q summed literally over unordered vertex pairs; the oracle for every
// modularity value below.
double pairwise_modularity(const MultilayerNetwork& net, const ModelParams& params, const MultilayerPartition& part) {
  double q = 0.0;
  for (LayerIndex l = 0; l < net.layer_count(); ++l) {
    const Layer& layer = net.layer(l);
    const double m = layer.total_weight();
    if (m == 0.0) continue;
    const std::size_t n = layer.size();
    std::vector<double> adj(n * n, 0.0);
    for (const auto& e : layer.edges()) adj[e.a * n + e.b] = adj[e.b * n + e.a] = e.weight;
    auto d = layer.strength();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (part.labels[l][i] != part.labels[l][j]) continue;
        q += params.beta[l] * (adj[i * n + j] - params.gamma[l] * d[i] * d[j] / (2.0 * m));
      }
    }
  }
  for (auto pair : net.couplings()) {
    for (auto [a, b] : net.shared_positions(pair.first, pair.second)) {
      if (part.labels[pair.first][a] == part.labels[pair.second][b]) q += params.omega_for(pair);
    }
  }
  return q;
}

TEST(MultilayerModularity, TwoTrianglesMatchesPairSum) {
  auto net = make_network(6, {cliques(2, 3)});
  auto params = ModelParams::uniform(net, 1.0, 0.0);
  MultilayerPartition planted{{{0, 0, 0, 1, 1, 1}}};
  // 6 internal edges minus 2 * 3 pairs * (2*2/12).
  EXPECT_NEAR(multilayer_modularity(net, params, planted), 4.0, 1e-12);
  EXPECT_NEAR(pairwise_modularity(net, params, planted), 4.0, 1e-12);
}

TEST(MultilayerModularity, MatchesPairSumOnRandomInstances) {
  CounterRng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3 + static_cast<int>(rng.below(8));
    std::vector<testing::EdgeList> layers{testing::random_edges(n, 0.4, rng), testing::random_edges(n, 0.5, rng),
                                          testing::random_edges(n, 0.3, rng)};
    auto net = make_network(n, layers);
    ModelParams params = ModelParams::uniform(net, 0.5 + rng.uniform(), 0.0);
    for (auto& [pair, w] : params.omega) w = rng.uniform() * 2.0;
    params.beta = {0.5, 1.0, 2.0};
    MultilayerPartition part;
    for (std::size_t l = 0; l < 3; ++l) {
      part.labels.emplace_back();
      for (int i = 0; i < n; ++i) part.labels.back().push_back(static_cast<Label>(rng.below(3)));
    }
    EXPECT_NEAR(multilayer_modularity(net, params, part), pairwise_modularity(net, params, part), 1e-9);
  }
}

TEST(MultilayerModularity, ZeroCouplingIsSumOfLayers) {
  CounterRng rng(11);
  auto net = make_network(7, {testing::random_edges(7, 0.5, rng), testing::random_edges(7, 0.5, rng)});
  auto params = ModelParams::uniform(net, 1.1, 0.0);
  MultilayerPartition part{{{0, 0, 1, 1, 2, 2, 0}, {1, 1, 0, 0, 2, 2, 1}}};
  double separate = 0.0;
  for (LayerIndex l = 0; l < 2; ++l) {
    testing::EdgeList edges;
    for (const auto& e : net.layer(l).edges()) edges.emplace_back(e.a, e.b);
    auto mono = make_network(7, {edges});
    separate += multilayer_modularity(mono, ModelParams::uniform(mono, 1.1, 0.0), MultilayerPartition{{part.labels[l]}});
  }
  EXPECT_NEAR(multilayer_modularity(net, params, part), separate, 1e-12);
}

TEST(MultilayerModularity, PositiveScalingOfBetaAndOmega) {
  CounterRng rng(3);
  auto net = make_network(5, {testing::random_edges(5, 0.6, rng), testing::random_edges(5, 0.6, rng)});
  auto params = ModelParams::uniform(net, 1.0, 0.7);
  auto scaled = params;
  const double c = 2.5;
  for (auto& b : scaled.beta) b *= c;
  for (auto& [pair, w] : scaled.omega) w *= c;

  double best = -1e300, best_scaled = -1e300;
  std::vector<std::vector<Label>> argmax, argmax_scaled;
  testing::for_each_set_partition(10, 3, [&](const std::vector<Label>& flat) {
    auto part = testing::split_labels(net, flat);
    const double q = multilayer_modularity(net, params, part);
    const double qs = multilayer_modularity(net, scaled, part);
    ASSERT_NEAR(qs, c * q, 1e-9);
    if (q > best + 1e-9) {
      best = q;
      argmax.clear();
    }
    if (std::abs(q - best) <= 1e-9) argmax.push_back(flat);
    if (qs > best_scaled + 1e-9) {
      best_scaled = qs;
      argmax_scaled.clear();
    }
    if (std::abs(qs - best_scaled) <= 1e-9) argmax_scaled.push_back(flat);
  });
  EXPECT_EQ(argmax, argmax_scaled);
}

TEST(MultilayerModularity, RejectsMismatchedDomain) {
  auto net = make_network(4, {cliques(1, 4)});
  auto params = ModelParams::uniform(net, 1.0, 0.0);
  EXPECT_THROW(multilayer_modularity(net, params, MultilayerPartition{{{0, 0, 1}}}), DataError);
  EXPECT_THROW(multilayer_modularity(net, params, MultilayerPartition{}), DataError);
}

TEST(IntraLoglik, NullPartitionIsZero) {
  auto net = make_network(6, {cliques(2, 3)});
  std::vector<Label> one(6, 0);
  auto [value, st] = intra_loglik(net.layer(0), one);
  EXPECT_DOUBLE_EQ(st.m, 6.0);
  EXPECT_DOUBLE_EQ(st.m_in, 6.0);
  EXPECT_NEAR(st.e_in, 6.0, 1e-12);
  EXPECT_DOUBLE_EQ(value, 0.0);
  EXPECT_TRUE(st.degenerate);
}

TEST(IntraLoglik, TwoTrianglesPlantedSplit) {
  auto net = make_network(6, {cliques(2, 3)});
  std::vector<Label> planted{0, 0, 0, 1, 1, 1};
  auto [value, st] = intra_loglik(net.layer(0), planted);
  EXPECT_DOUBLE_EQ(st.m_in, 6.0);
  EXPECT_NEAR(st.e_in, 3.0, 1e-12);
  EXPECT_NEAR(value, 6.0 * std::numbers::ln2, 1e-12);

  // Exhaustive search over all labellings finds nothing better.
  double best = 0.0;
  testing::for_each_set_partition(6, 6, [&](const std::vector<Label>& g) {
    best = std::max(best, intra_loglik(net.layer(0), g).first);
  });
  EXPECT_NEAR(best, 6.0 * std::numbers::ln2, 1e-12);
}

TEST(IntraLoglik, NonNegativeOnRandomGraphs) {
  CounterRng rng(19);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 10 + static_cast<int>(rng.below(20));
    auto net = make_network(n, {testing::random_edges(n, 0.2, rng)});
    if (net.layer(0).edges().empty()) continue;
    std::vector<Label> g;
    for (int i = 0; i < n; ++i) g.push_back(static_cast<Label>(rng.below(4)));
    EXPECT_GE(intra_loglik(net.layer(0), g).first, 0.0);
  }
}

TEST(IntraLoglik, EmptyLayerIsDegenerateZero) {
  auto net = make_network(3, {{}});
  auto [value, st] = intra_loglik(net.layer(0), std::vector<Label>{0, 1, 2});
  EXPECT_EQ(value, 0.0);
  EXPECT_TRUE(st.degenerate);
}

TEST(GammaHat, HandValues) {
  EXPECT_DOUBLE_EQ(gamma_hat(1.0, 1.0).value, 1.0);
  EXPECT_NEAR(gamma_hat(2.0, 0.5).value, 1.5 / std::log(4.0), 1e-12);
  EXPECT_NEAR(gamma_hat(2.0, 0.5).value, 1.0820, 1e-4);
  EXPECT_NEAR(gamma_hat(std::numbers::e, 1.0).value, std::numbers::e - 1.0, 1e-12);
  EXPECT_FALSE(gamma_hat(2.0, 0.5).flagged);
}

TEST(GammaHat, ZeroThetaOutIsClampedAndFlagged) {
  auto est = gamma_hat(2.0, 0.0);
  EXPECT_TRUE(est.flagged);
  EXPECT_NEAR(est.value, (2.0 - kThetaFloor) / (std::log(2.0) - std::log(kThetaFloor)), 1e-12);
}

TEST(CopyCoupling, OmegaFromP) {
  EXPECT_DOUBLE_EQ(omega_from_p(0.0, 3), 0.0);
  EXPECT_NEAR(omega_from_p(0.5, 3), std::log(4.0), 1e-12);
  for (int k = 2; k <= 6; ++k) {
    double prev = -1.0;
    for (double p = 0.0; p <= 1.0 - kCopyClamp; p += 0.037) {
      const double w = omega_from_p(p, k);
      EXPECT_GT(w, prev);
      prev = w;
      EXPECT_NEAR(p_from_omega(w, k), p, 1e-12);
    }
  }
}

TEST(InterLoglik, Examples) {
  // Two 10-vertex layers; labels chosen to realize each example.
  auto net = make_network(10, {{}, {}});
  const LayerPair pair{0, 1};
  {
    MultilayerPartition same{{std::vector<Label>(10, 0), std::vector<Label>(10, 0)}};
    for (int i = 0; i < 10; ++i) same.labels[0][i] = same.labels[1][i] = i % 3;
    auto [value, st] = inter_loglik(net, same, pair, 3);
    EXPECT_EQ(st.n_shared, 10u);
    EXPECT_EQ(st.n_same, 10u);
    EXPECT_DOUBLE_EQ(st.p_hat, 1.0 - kCopyClamp);
    // 1 - p + pK at p = 1 - eps, K = 3.
    EXPECT_NEAR(value, 10.0 * std::log(kCopyClamp + (1.0 - kCopyClamp) * 3.0), 1e-12);
    EXPECT_NEAR(value, 10.0 * std::log(2.998), 1e-12);
  }
  {
    MultilayerPartition half{{{0, 0, 0, 0, 0, 1, 1, 1, 1, 1}, {0, 0, 0, 0, 0, 0, 0, 0, 0, 0}}};
    auto [value, st] = inter_loglik(net, half, pair, 2);
    EXPECT_EQ(st.n_same, 5u);
    EXPECT_DOUBLE_EQ(st.p_hat, 0.0);
    EXPECT_DOUBLE_EQ(value, 0.0);
  }
  {
    // f = 1/K exactly: 3 of 9 shared agree with K = 3.
    auto net9 = make_network(9, {{}, {}});
    MultilayerPartition indep{{{0, 1, 2, 0, 1, 2, 0, 1, 2}, {0, 0, 0, 1, 1, 1, 2, 2, 2}}};
    auto [value, st] = inter_loglik(net9, indep, pair, 3);
    EXPECT_EQ(st.n_same, 3u);
    EXPECT_DOUBLE_EQ(st.p_hat, 0.0);
    EXPECT_DOUBLE_EQ(value, 0.0);
  }
  MultilayerPartition any{{std::vector<Label>(10, 0), std::vector<Label>(10, 0)}};
  EXPECT_THROW(inter_loglik(net, any, pair, 1), NumericError);
}

TEST(InterLoglik, NoSharedVerticesIsZero) {
  auto net = make_network(4, {{}, {}}, {{0, 1}, {2, 3}});
  MultilayerPartition part{{{0, 1}, {0, 1}}};
  auto [value, st] = inter_loglik(net, part, LayerPair{0, 1}, 2);
  EXPECT_EQ(st.n_shared, 0u);
  EXPECT_EQ(value, 0.0);
}

TEST(InterLoglik, NonNegativeProperty) {
  CounterRng rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(30));
    auto net = make_network(n, {{}, {}});
    const int k = 2 + static_cast<int>(rng.below(4));
    MultilayerPartition part{{{}, {}}};
    for (int i = 0; i < n; ++i) {
      part.labels[0].push_back(static_cast<Label>(rng.below(static_cast<std::uint64_t>(k))));
      part.labels[1].push_back(rng.bernoulli(0.5) ? part.labels[0].back()
                                                  : static_cast<Label>(rng.below(static_cast<std::uint64_t>(k))));
    }
    EXPECT_GE(inter_loglik(net, part, LayerPair{0, 1}, k).first, 0.0);
  }
}

TEST(DefaultKPair, FlooredAndCapped) {
  MultilayerPartition part{{{0, 0, 0}, {0, 0, 0}}};
  EXPECT_EQ(default_k_pair(part, {0, 1}), 2);
  MultilayerPartition wide{{{0, 1, 2}, {3, 4, 5}}};
  EXPECT_EQ(default_k_pair(wide, {0, 1}), 6);
  std::vector<int> caps{3, 0};
  EXPECT_EQ(default_k_pair(wide, {0, 1}, caps), 3);
}

TEST(TotalLoglik, SumsItsParts) {
  CounterRng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 4 + static_cast<int>(rng.below(10));
    auto net = make_network(n, {testing::random_edges(n, 0.4, rng), testing::random_edges(n, 0.4, rng),
                                testing::random_edges(n, 0.4, rng)});
    MultilayerPartition part;
    for (int l = 0; l < 3; ++l) {
      part.labels.emplace_back();
      for (int i = 0; i < n; ++i) part.labels.back().push_back(static_cast<Label>(rng.below(3)));
    }
    auto sb = total_loglik(net, part);
    EXPECT_NEAR(sb.total, sb.intra_sum() + sb.inter_sum(), 1e-9);
    EXPECT_EQ(sb.inter.size(), 3u);
    auto mono = total_loglik(net.with_couplings({}), part);
    EXPECT_TRUE(mono.inter.empty());
    EXPECT_EQ(mono.total, mono.intra_sum());
  }
}

TEST(TotalLoglik, PersistentPillarHasPositiveInterTerm) {
  auto net = make_network(9, {cliques(3, 3), cliques(3, 3)});
  MultilayerPartition pillar{{{0, 0, 0, 1, 1, 1, 2, 2, 2}, {0, 0, 0, 1, 1, 1, 2, 2, 2}}};
  auto sb = total_loglik(net, pillar);
  EXPECT_GT(sb.inter.at({0, 1}), 0.0);
}

TEST(Scores, InvariantUnderLabelPermutation) {
  CounterRng rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 6 + static_cast<int>(rng.below(6));
    auto net = make_network(n, {testing::random_edges(n, 0.5, rng), testing::random_edges(n, 0.5, rng)});
    auto params = ModelParams::uniform(net, 0.9, 0.6);
    MultilayerPartition part;
    for (int l = 0; l < 2; ++l) {
      part.labels.emplace_back();
      for (int i = 0; i < n; ++i) part.labels.back().push_back(static_cast<Label>(rng.below(4)));
    }
    // A global relabelling g -> (g * 7 + 3) mod 11 is a bijection on 0..3.
    auto permuted = part;
    for (auto& layer : permuted.labels) {
      for (auto& g : layer) g = (g * 7 + 3) % 11;
    }
    EXPECT_NEAR(multilayer_modularity(net, params, part), multilayer_modularity(net, params, permuted), 1e-12);
    EXPECT_NEAR(total_loglik(net, part).total, total_loglik(net, permuted).total, 1e-12);
  }
}

TEST(UpdateParams, IndependentLabelsGiveZeroCoupling) {
  auto net = make_network(9, {cliques(3, 3), cliques(3, 3)});
  // Agreement 3/9 = 1/K with K = 3.
  MultilayerPartition part{{{0, 0, 0, 1, 1, 1, 2, 2, 2}, {0, 1, 2, 0, 1, 2, 0, 1, 2}}};
  auto up = update_params_from_partition(net, part, ModelParams::uniform(net, 1.0, 1.0, 3));
  EXPECT_DOUBLE_EQ(up.params.omega.at({0, 1}), 0.0);
  EXPECT_EQ(up.params.beta, (std::vector<double>{1.0, 1.0}));
}

TEST(UpdateParams, NullPartitionFallsBackToUnitResolution) {
  auto net = make_network(6, {cliques(2, 3)});
  auto up = update_params_from_partition(net, MultilayerPartition{{std::vector<Label>(6, 0)}},
                                         ModelParams::uniform(net, 0.7, 0.0));
  EXPECT_DOUBLE_EQ(up.params.gamma[0], 1.0);
  EXPECT_EQ(up.degenerate_layers, (std::vector<LayerIndex>{0}));
}

TEST(UpdateParams, PillarGetsPositiveCoupling) {
  auto net = make_network(9, {cliques(3, 3), cliques(3, 3), cliques(3, 3)});
  std::vector<Label> g{0, 0, 0, 1, 1, 1, 2, 2, 2};
  auto up = update_params_from_partition(net, MultilayerPartition{{g, g, g}}, ModelParams::uniform(net, 1.0, 0.0));
  EXPECT_EQ(up.params.omega.size(), 3u);
  for (const auto& [pair, w] : up.params.omega) EXPECT_GT(w, 0.0);
  for (double gamma : up.params.gamma) EXPECT_GT(gamma, 0.0);
}

TEST(IntraLoglik, DisassortativeFitScoresZero) {
  // Star: splitting centre from leaves puts every edge between communities.
  auto net = make_network(4, {{{0, 1}, {0, 2}, {0, 3}}});
  auto [value, st] = intra_loglik(net.layer(0), std::vector<Label>{0, 1, 1, 1});
  EXPECT_TRUE(st.disassortative);
  EXPECT_LT(st.theta_in, st.theta_out);
  EXPECT_EQ(value, 0.0);
}

// Exhaustive check of the modularity / planted-partition equivalence: the
// likelihood-optimal partition is Q-optimal at its own fitted resolution.
TEST(Bridge, LikelihoodOptimumIsModularityOptimumAtFittedGamma) {
  CounterRng rng(31);
  int checked = 0, agree = 0;
  while (checked < 40) {
    const int n = 4 + static_cast<int>(rng.below(3));
    // Two planted groups so most instances carry assortative structure.
    testing::EdgeList edges;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (rng.bernoulli((i < n / 2) == (j < n / 2) ? 0.8 : 0.25)) edges.emplace_back(i, j);
      }
    }
    auto net = make_network(n, {edges});
    if (net.layer(0).edges().empty()) continue;
    ++checked;
    double best_l = -1.0;
    std::vector<Label> best_g;
    testing::for_each_set_partition(n, 3, [&](const std::vector<Label>& g) {
      const double l = intra_loglik(net.layer(0), g).first;
      if (l > best_l + 1e-12) {
        best_l = l;
        best_g = g;
      }
    });
    auto st = intra_loglik(net.layer(0), best_g).second;
    auto params = ModelParams::uniform(net, gamma_hat(st).value, 0.0);
    const double q_star = multilayer_modularity(net, params, MultilayerPartition{{best_g}});
    double q_max = -1e300;
    testing::for_each_set_partition(n, 3, [&](const std::vector<Label>& g) {
      q_max = std::max(q_max, multilayer_modularity(net, params, MultilayerPartition{{g}}));
    });
    if (q_star >= q_max - 1e-9) ++agree;
  }
  EXPECT_EQ(agree, 40);
}

}  // namespace
}  // namespace coalmux
