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

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "coalmux/netmodel.hpp"
#include "coalmux/rng.hpp"

namespace coalmux {

struct SupraEdge {
  std::uint32_t u = 0;
  std::uint32_t v = 0;
  double weight = 0.0;
};

/// Supra-graph over all participating (vertex, layer) pairs. Node order is
/// (layer order, participant position). Intra-layer edges carry beta_s A_ij,
/// inter-layer edges carry omega_sr between copies of one vertex.
struct SupraGraph {
  std::size_t layer_count = 0;
  std::vector<LayerIndex> node_layer;
  std::vector<std::size_t> layer_offset;  // layer_count + 1 entries
  /// Null-model strength d_i of each node within its layer.
  std::vector<double> degree;
  /// beta_s gamma_s / (2 m_s) per layer; 0 for edgeless layers.
  std::vector<double> null_coef;
  /// Community cap per layer; 0 means unbounded.
  std::vector<int> k_max;
  /// Layers that interact through couplings. Each group is optimized alone.
  std::vector<std::vector<LayerIndex>> layer_groups;
  /// Per-layer seed salt, derived from the layer key.
  std::vector<std::uint64_t> layer_salt;

  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> targets;
  std::vector<double> weights;
  std::size_t intra_edge_count = 0;
  std::size_t inter_edge_count = 0;

  std::size_t size() const noexcept { return node_layer.size(); }
  std::size_t node(LayerIndex l, std::uint32_t position) const { return layer_offset[l] + position; }

  std::span<const std::uint32_t> neighbors(std::size_t u) const {
    return {targets.data() + offsets[u], offsets[u + 1] - offsets[u]};
  }
  std::span<const double> neighbor_weights(std::size_t u) const {
    return {weights.data() + offsets[u], offsets[u + 1] - offsets[u]};
  }
};

/// Connected components of the layer graph spanned by `pairs`, each sorted.
inline std::vector<std::vector<LayerIndex>> coupling_groups(std::size_t n, std::span<const LayerPair> pairs) {
  std::vector<LayerIndex> parent(n);
  std::iota(parent.begin(), parent.end(), 0u);
  auto find = [&](LayerIndex x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (auto p : pairs) {
    auto a = find(p.first);
    auto b = find(p.second);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::vector<LayerIndex>> groups;
  std::vector<int> slot(n, -1);
  for (LayerIndex l = 0; l < n; ++l) {
    auto root = find(l);
    if (slot[root] < 0) {
      slot[root] = static_cast<int>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<std::size_t>(slot[root])].push_back(l);
  }
  return groups;
}

inline std::vector<std::vector<LayerIndex>> coupling_groups(const MultilayerNetwork& net) {
  return coupling_groups(net.layer_count(), net.couplings());
}

/// Fills the adjacency arrays from an undirected edge list. Parallel edges are
/// summed; neighbor lists are sorted by target.
inline void assemble_adjacency(SupraGraph& sg, std::vector<SupraEdge> edges) {
  const std::size_t n = sg.size();
  std::vector<SupraEdge> directed;
  directed.reserve(edges.size() * 2);
  for (const auto& e : edges) {
    directed.push_back(e);
    directed.push_back({e.v, e.u, e.weight});
  }
  std::sort(directed.begin(), directed.end(),
            [](const SupraEdge& a, const SupraEdge& b) { return a.u != b.u ? a.u < b.u : a.v < b.v; });
  sg.offsets.assign(n + 1, 0);
  sg.targets.clear();
  sg.weights.clear();
  for (std::size_t i = 0; i < directed.size(); ++i) {
    if (!sg.targets.empty() && i > 0 && directed[i].u == directed[i - 1].u && directed[i].v == directed[i - 1].v) {
      sg.weights.back() += directed[i].weight;
      continue;
    }
    sg.targets.push_back(directed[i].v);
    sg.weights.push_back(directed[i].weight);
    ++sg.offsets[directed[i].u + 1];
  }
  for (std::size_t u = 0; u < n; ++u) sg.offsets[u + 1] += sg.offsets[u];
}

/// Node bookkeeping shared by every supra-graph over `net`.
inline SupraGraph supra_skeleton(const MultilayerNetwork& net) {
  SupraGraph sg;
  sg.layer_count = net.layer_count();
  sg.layer_offset.assign(net.layer_count() + 1, 0);
  for (LayerIndex l = 0; l < net.layer_count(); ++l) {
    sg.layer_offset[l + 1] = sg.layer_offset[l] + net.layer(l).size();
    sg.node_layer.insert(sg.node_layer.end(), net.layer(l).size(), l);
    sg.layer_salt.push_back(hash_string(net.layer(l).key()));
  }
  sg.degree.assign(sg.size(), 0.0);
  sg.null_coef.assign(net.layer_count(), 0.0);
  sg.k_max.assign(net.layer_count(), 0);
  sg.layer_groups = coupling_groups(net);
  return sg;
}

/// Supra-graph for multilayer modularity under `params`. Zero couplings are
/// omitted unless `keep_zero_couplings`; both forms score identically.
inline SupraGraph build_supra(const MultilayerNetwork& net, const ModelParams& params,
                              bool keep_zero_couplings = false) {
  params.validate(net);
  SupraGraph sg = supra_skeleton(net);
  std::vector<SupraEdge> edges;
  for (LayerIndex l = 0; l < net.layer_count(); ++l) {
    const Layer& layer = net.layer(l);
    const double m = layer.total_weight();
    sg.null_coef[l] = m > 0.0 ? params.beta[l] * params.gamma[l] / (2.0 * m) : 0.0;
    sg.k_max[l] = params.k_max[l];
    auto s = layer.strength();
    for (std::uint32_t p = 0; p < layer.size(); ++p) sg.degree[sg.node(l, p)] = s[p];
    for (const auto& e : layer.edges()) {
      edges.push_back({static_cast<std::uint32_t>(sg.node(l, e.a)), static_cast<std::uint32_t>(sg.node(l, e.b)),
                       params.beta[l] * e.weight});
    }
  }
  sg.intra_edge_count = edges.size();
  std::vector<LayerPair> active;
  for (auto pair : net.couplings()) {
    const double w = params.omega_for(pair);
    if (w == 0.0 && !keep_zero_couplings) continue;
    active.push_back(pair);
    for (auto [ps, pr] : net.shared_positions(pair.first, pair.second)) {
      edges.push_back({static_cast<std::uint32_t>(sg.node(pair.first, ps)),
                       static_cast<std::uint32_t>(sg.node(pair.second, pr)), w});
      ++sg.inter_edge_count;
    }
  }
  // Layers joined only by zero couplings are optimized as separate groups.
  sg.layer_groups = coupling_groups(net.layer_count(), active);
  assemble_adjacency(sg, std::move(edges));
  return sg;
}

/// Flattens a partition to one label per supra node.
inline std::vector<Label> node_labels(const SupraGraph& sg, const MultilayerPartition& part) {
  std::vector<Label> out(sg.size());
  for (LayerIndex l = 0; l < sg.layer_count; ++l) {
    for (std::size_t p = 0; p < part.labels[l].size(); ++p) out[sg.layer_offset[l] + p] = part.labels[l][p];
  }
  return out;
}

inline MultilayerPartition partition_from_nodes(const SupraGraph& sg, std::span<const Label> labels) {
  MultilayerPartition part;
  part.labels.resize(sg.layer_count);
  for (LayerIndex l = 0; l < sg.layer_count; ++l) {
    part.labels[l].assign(labels.begin() + static_cast<std::ptrdiff_t>(sg.layer_offset[l]),
                          labels.begin() + static_cast<std::ptrdiff_t>(sg.layer_offset[l + 1]));
  }
  return part;
}

/// Modularity evaluated directly on the supra-graph. Equals
/// multilayer_modularity for a supra-graph built by build_supra.
inline double supra_quality(const SupraGraph& sg, std::span<const Label> labels) {
  double q = 0.0;
  for (std::size_t u = 0; u < sg.size(); ++u) {
    auto nb = sg.neighbors(u);
    auto wt = sg.neighbor_weights(u);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      if (nb[i] > u && labels[u] == labels[nb[i]]) q += wt[i];
    }
  }
  // Per (label, layer): sum of d and sum of d^2.
  std::vector<std::pair<std::pair<Label, LayerIndex>, std::pair<double, double>>> mass;
  {
    std::vector<std::size_t> order(sg.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::pair(labels[a], sg.node_layer[a]) < std::pair(labels[b], sg.node_layer[b]);
    });
    for (auto u : order) {
      auto key = std::pair(labels[u], sg.node_layer[u]);
      if (mass.empty() || mass.back().first != key) mass.push_back({key, {0.0, 0.0}});
      mass.back().second.first += sg.degree[u];
      mass.back().second.second += sg.degree[u] * sg.degree[u];
    }
  }
  for (const auto& [key, sums] : mass) {
    q -= sg.null_coef[key.second] * (sums.first * sums.first - sums.second) / 2.0;
  }
  return q;
}

}  // namespace coalmux
