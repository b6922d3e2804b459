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

#pragma once

#include <cstdint>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>

#include "coalmux/error.hpp"
#include "coalmux/netmodel.hpp"

namespace coalmux {

/// Name of the null model, recorded in output metadata.
inline constexpr const char* kBackboneNull = "poisson-gamma-tail(mu=s_i*s_j/(2T))";

struct EdgeSignificance {
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  double weight = 0.0;
  double mu = 0.0;
  double pvalue = 1.0;
};

struct BackboneResult {
  std::string layer_key;
  double alpha = 0.05;
  std::vector<EdgeSignificance> edges;
  /// kept[i] == (edges[i].pvalue < alpha).
  std::vector<bool> kept;
  double density_before = 0.0;
  double density_after = 0.0;
};

/// P(W >= w) for a count with mean mu. Equals the Poisson survival function
/// for integer w and extends it continuously through the regularized lower
/// incomplete gamma P(w, mu).
inline double count_survival(double w, double mu) {
  if (w <= 0.0) return 1.0;
  return boost::math::gamma_p(w, mu);
}

/// One-sided p-value of every edge against the null mean s_i s_j / (2T).
inline std::vector<EdgeSignificance> edge_pvalues(const Layer& layer) {
  if (layer.edges().empty()) throw NumericError(fmt::format("layer '{}' has no edges to backbone", layer.key()));
  const double two_t = 2.0 * layer.total_weight();
  auto s = layer.strength();
  std::vector<EdgeSignificance> out;
  out.reserve(layer.edges().size());
  for (const auto& e : layer.edges()) {
    const double mu = s[e.a] * s[e.b] / two_t;
    out.push_back({e.a, e.b, e.weight, mu, count_survival(e.weight, mu)});
  }
  return out;
}

/// Keeps edges with p-value strictly below alpha, as unit-weight edges.
/// Participants are unchanged, so dropped edges may leave isolates.
/// `keep_all` bypasses the test and only binarizes.
inline std::pair<Layer, BackboneResult> filter_layer(const Layer& layer, double alpha, bool keep_all = false) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw UsageError(fmt::format("alpha must be in (0, 1], got {}", alpha));
  BackboneResult result;
  result.layer_key = layer.key();
  result.alpha = alpha;
  result.edges = edge_pvalues(layer);
  std::vector<std::tuple<VertexIndex, VertexIndex, double>> kept;
  for (const auto& e : result.edges) {
    const bool keep = keep_all || e.pvalue < alpha;
    result.kept.push_back(keep);
    if (keep) kept.emplace_back(layer.vertex(e.a), layer.vertex(e.b), 1.0);
  }
  std::vector<VertexIndex> participants(layer.participants().begin(), layer.participants().end());
  Layer filtered = Layer::make(layer.key(), layer.id(), std::move(participants), kept);
  result.density_before = layer.density();
  result.density_after = filtered.density();
  return {std::move(filtered), std::move(result)};
}

/// Backbones every layer. Edgeless layers pass through unchanged; with
/// `keep_all` every edge is kept and weights are set to 1.
inline std::pair<MultilayerNetwork, std::vector<BackboneResult>> backbone_network(const MultilayerNetwork& net,
                                                                                  double alpha, bool keep_all = false) {
  std::vector<Layer> layers;
  std::vector<BackboneResult> results;
  for (const auto& layer : net.layers()) {
    if (layer.edges().empty()) {
      layers.push_back(layer);
      continue;
    }
    auto [filtered, result] = filter_layer(layer, alpha, keep_all);
    layers.push_back(std::move(filtered));
    results.push_back(std::move(result));
  }
  return {MultilayerNetwork(net.registry(), std::move(layers),
                            std::vector<LayerPair>(net.couplings().begin(), net.couplings().end())),
          std::move(results)};
}

}  // namespace coalmux
