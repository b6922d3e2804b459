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

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "coalmux/netmodel.hpp"
#include "coalmux/rng.hpp"

namespace coalmux::testing {

using EdgeList = std::vector<std::pair<int, int>>;

/// Registry v0..v{n-1} with power i+1; layer l is keyed "L{l}" with mode
/// "M{l}" at time 0 unless `ids` is given. Participants default to every
/// vertex.
inline MultilayerNetwork make_network(int n, const std::vector<EdgeList>& layer_edges,
                                      std::vector<std::vector<int>> participants = {},
                                      std::vector<LayerId> ids = {}) {
  VertexRegistry reg;
  for (int i = 0; i < n; ++i) reg.add({"v" + std::to_string(i), "Vertex " + std::to_string(i), "org", i + 1.0});
  std::vector<Layer> layers;
  for (std::size_t l = 0; l < layer_edges.size(); ++l) {
    std::vector<VertexIndex> parts;
    if (participants.empty()) {
      for (int i = 0; i < n; ++i) parts.push_back(static_cast<VertexIndex>(i));
    } else {
      for (int i : participants[l]) parts.push_back(static_cast<VertexIndex>(i));
    }
    std::vector<std::tuple<VertexIndex, VertexIndex, double>> edges;
    for (auto [u, v] : layer_edges[l]) edges.emplace_back(u, v, 1.0);
    LayerId id = ids.empty() ? LayerId{"M" + std::to_string(l), 0} : ids[l];
    layers.push_back(Layer::make("L" + std::to_string(l), id, parts, edges));
  }
  return MultilayerNetwork(std::move(reg), std::move(layers));
}

inline EdgeList clique(int first, int size) {
  EdgeList e;
  for (int i = first; i < first + size; ++i) {
    for (int j = i + 1; j < first + size; ++j) e.emplace_back(i, j);
  }
  return e;
}

inline EdgeList cliques(int count, int size) {
  EdgeList e;
  for (int c = 0; c < count; ++c) {
    auto part = clique(c * size, size);
    e.insert(e.end(), part.begin(), part.end());
  }
  return e;
}

inline EdgeList random_edges(int n, double p, CounterRng& rng) {
  EdgeList e;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (rng.bernoulli(p)) e.emplace_back(i, j);
    }
  }
  return e;
}

/// Calls `fn` with every labelling of n items by restricted growth strings
/// using at most `max_labels` labels (each set partition exactly once).
inline void for_each_set_partition(int n, int max_labels, const std::function<void(const std::vector<Label>&)>& fn) {
  std::vector<Label> g(static_cast<std::size_t>(n), 0);
  std::function<void(int, int)> rec = [&](int i, int used) {
    if (i == n) {
      fn(g);
      return;
    }
    for (int c = 0; c <= used && c < max_labels; ++c) {
      g[static_cast<std::size_t>(i)] = c;
      rec(i + 1, std::max(used, c + 1));
    }
  };
  if (n == 0) {
    fn(g);
    return;
  }
  rec(0, 0);
}

/// Splits a flat label vector into per-layer labels of the given sizes.
inline MultilayerPartition split_labels(const MultilayerNetwork& net, const std::vector<Label>& flat) {
  MultilayerPartition part;
  std::size_t k = 0;
  for (const auto& layer : net.layers()) {
    part.labels.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(k),
                             flat.begin() + static_cast<std::ptrdiff_t>(k + layer.size()));
    k += layer.size();
  }
  return part;
}

}  // namespace coalmux::testing
