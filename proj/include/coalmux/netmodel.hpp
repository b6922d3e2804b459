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
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "coalmux/error.hpp"

namespace coalmux {

using VertexIndex = std::uint32_t;
using LayerIndex = std::uint32_t;
using Label = std::int32_t;

struct Vertex {
  std::string id;
  std::string name;
  std::string actor_type;
  double power = 0.0;

  bool operator==(const Vertex&) const = default;
};

/// Actor table. Dense handles are assigned in insertion order and are the
/// only indices used internally.
class VertexRegistry {
 public:
  VertexIndex add(Vertex v) {
    if (v.id.empty()) throw DataError("vertex id must be non-empty");
    if (!(v.power >= 0.0)) throw DataError(fmt::format("vertex '{}': power must be >= 0", v.id));
    if (index_.contains(v.id)) throw DataError(fmt::format("duplicate vertex id '{}'", v.id));
    const auto handle = static_cast<VertexIndex>(entries_.size());
    index_.emplace(v.id, handle);
    entries_.push_back(std::move(v));
    return handle;
  }

  std::optional<VertexIndex> find(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t size() const noexcept { return entries_.size(); }
  const Vertex& operator[](VertexIndex i) const { return entries_[i]; }
  const std::vector<Vertex>& entries() const noexcept { return entries_; }

  double total_power() const noexcept {
    double total = 0.0;
    for (const auto& v : entries_) total += v.power;
    return total;
  }

  bool operator==(const VertexRegistry& o) const { return entries_ == o.entries_; }

 private:
  std::vector<Vertex> entries_;
  std::unordered_map<std::string, VertexIndex> index_;
};

/// A relational context: a mode of tie observed at a time slice.
struct LayerId {
  std::string mode;
  int time = 0;

  auto operator<=>(const LayerId&) const = default;
};

/// Undirected edge between two participant positions, a < b.
struct LayerEdge {
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  double weight = 1.0;

  bool operator==(const LayerEdge&) const = default;
};

/// One layer of the multilayer network. Participants are kept sorted by
/// vertex handle; edges refer to positions in that list.
class Layer {
 public:
  Layer() = default;

  /// Builds a validated layer from global vertex handles. Edges are given as
  /// (u, v, weight) over handles; every endpoint must be a participant.
  static Layer make(std::string key, LayerId id, std::vector<VertexIndex> participants,
                    const std::vector<std::tuple<VertexIndex, VertexIndex, double>>& edges) {
    Layer layer;
    layer.key_ = std::move(key);
    layer.id_ = std::move(id);
    std::sort(participants.begin(), participants.end());
    if (std::adjacent_find(participants.begin(), participants.end()) != participants.end()) {
      throw DataError(fmt::format("layer '{}': duplicate participant", layer.key_));
    }
    layer.participants_ = std::move(participants);
    layer.edges_.reserve(edges.size());
    for (const auto& [u, v, w] : edges) {
      if (u == v) throw DataError(fmt::format("layer '{}': self-loop on vertex {}", layer.key_, u));
      if (!(w > 0.0)) throw DataError(fmt::format("layer '{}': non-positive weight {}", layer.key_, w));
      auto pu = layer.position(u);
      auto pv = layer.position(v);
      if (!pu || !pv) throw DataError(fmt::format("layer '{}': edge endpoint is not a participant", layer.key_));
      auto a = std::min(*pu, *pv);
      auto b = std::max(*pu, *pv);
      layer.edges_.push_back({a, b, w});
    }
    std::sort(layer.edges_.begin(), layer.edges_.end(),
              [](const LayerEdge& x, const LayerEdge& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });
    for (std::size_t i = 1; i < layer.edges_.size(); ++i) {
      if (layer.edges_[i].a == layer.edges_[i - 1].a && layer.edges_[i].b == layer.edges_[i - 1].b) {
        throw DataError(fmt::format("layer '{}': duplicate edge", layer.key_));
      }
    }
    layer.strength_.assign(layer.participants_.size(), 0.0);
    layer.total_weight_ = 0.0;
    for (const auto& e : layer.edges_) {
      layer.strength_[e.a] += e.weight;
      layer.strength_[e.b] += e.weight;
      layer.total_weight_ += e.weight;
    }
    return layer;
  }

  const std::string& key() const noexcept { return key_; }
  const LayerId& id() const noexcept { return id_; }
  std::span<const VertexIndex> participants() const noexcept { return participants_; }
  std::span<const LayerEdge> edges() const noexcept { return edges_; }
  std::size_t size() const noexcept { return participants_.size(); }
  VertexIndex vertex(std::uint32_t position) const { return participants_[position]; }

  std::optional<std::uint32_t> position(VertexIndex v) const {
    auto it = std::lower_bound(participants_.begin(), participants_.end(), v);
    if (it == participants_.end() || *it != v) return std::nullopt;
    return static_cast<std::uint32_t>(it - participants_.begin());
  }

  /// Weighted degree per participant position.
  std::span<const double> strength() const noexcept { return strength_; }
  /// Sum of edge weights (m for unweighted layers).
  double total_weight() const noexcept { return total_weight_; }

  /// Unweighted degree per participant position.
  std::vector<std::size_t> degrees() const {
    std::vector<std::size_t> deg(participants_.size(), 0);
    for (const auto& e : edges_) {
      ++deg[e.a];
      ++deg[e.b];
    }
    return deg;
  }

  /// Edge count over the number of participant pairs.
  double density() const noexcept {
    const double n = static_cast<double>(participants_.size());
    if (n < 2) return 0.0;
    return static_cast<double>(edges_.size()) / (n * (n - 1) / 2.0);
  }

  bool operator==(const Layer& o) const {
    return key_ == o.key_ && id_ == o.id_ && participants_ == o.participants_ && edges_ == o.edges_;
  }

 private:
  std::string key_;
  LayerId id_;
  std::vector<VertexIndex> participants_;
  std::vector<LayerEdge> edges_;
  std::vector<double> strength_;
  double total_weight_ = 0.0;
};

/// Unordered layer pair stored with first < second.
struct LayerPair {
  LayerIndex first = 0;
  LayerIndex second = 0;

  static LayerPair of(LayerIndex a, LayerIndex b) { return a < b ? LayerPair{a, b} : LayerPair{b, a}; }
  auto operator<=>(const LayerPair&) const = default;
};

enum class CouplingTopology { kAllPairs, kTemporal };

class MultilayerNetwork {
 public:
  MultilayerNetwork() = default;

  MultilayerNetwork(VertexRegistry registry, std::vector<Layer> layers, std::vector<LayerPair> couplings)
      : registry_(std::move(registry)), layers_(std::move(layers)) {
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      if (layers_[i].key().empty()) throw DataError("layer id must be non-empty");
      for (std::size_t j = 0; j < i; ++j) {
        if (layers_[j].key() == layers_[i].key()) {
          throw DataError(fmt::format("duplicate layer id '{}'", layers_[i].key()));
        }
        if (layers_[j].id() == layers_[i].id()) {
          throw DataError(fmt::format("layers '{}' and '{}' share (mode, time)", layers_[j].key(), layers_[i].key()));
        }
      }
      for (auto v : layers_[i].participants()) {
        if (v >= registry_.size()) throw DataError(fmt::format("layer '{}': unknown vertex", layers_[i].key()));
      }
    }
    set_couplings(std::move(couplings));
  }

  /// Network with the default all-pairs coupling topology.
  MultilayerNetwork(VertexRegistry registry, std::vector<Layer> layers)
      : MultilayerNetwork(std::move(registry), std::move(layers), {}) {
    set_couplings(topology_pairs(CouplingTopology::kAllPairs));
  }

  const VertexRegistry& registry() const noexcept { return registry_; }
  std::span<const Layer> layers() const noexcept { return layers_; }
  const Layer& layer(LayerIndex l) const { return layers_[l]; }
  std::size_t layer_count() const noexcept { return layers_.size(); }
  std::span<const LayerPair> couplings() const noexcept { return couplings_; }

  std::optional<LayerIndex> find_layer(const std::string& key) const {
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      if (layers_[i].key() == key) return static_cast<LayerIndex>(i);
    }
    return std::nullopt;
  }

  /// Pairs implied by a named topology. kTemporal couples consecutive time
  /// slices of the same mode.
  std::vector<LayerPair> topology_pairs(CouplingTopology topology) const {
    std::vector<LayerPair> pairs;
    const auto n = static_cast<LayerIndex>(layers_.size());
    for (LayerIndex i = 0; i < n; ++i) {
      for (LayerIndex j = i + 1; j < n; ++j) {
        const auto& a = layers_[i].id();
        const auto& b = layers_[j].id();
        if (topology == CouplingTopology::kAllPairs ||
            (a.mode == b.mode && (a.time - b.time == 1 || b.time - a.time == 1))) {
          pairs.push_back({i, j});
        }
      }
    }
    return pairs;
  }

  MultilayerNetwork with_couplings(std::vector<LayerPair> couplings) const {
    MultilayerNetwork copy = *this;
    copy.set_couplings(std::move(couplings));
    return copy;
  }

  /// Participant positions (in s, in r) of vertices present in both layers.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> shared_positions(LayerIndex s, LayerIndex r) const {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
    auto ps = layers_[s].participants();
    auto pr = layers_[r].participants();
    std::size_t i = 0, j = 0;
    while (i < ps.size() && j < pr.size()) {
      if (ps[i] < pr[j]) {
        ++i;
      } else if (pr[j] < ps[i]) {
        ++j;
      } else {
        out.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
        ++i;
        ++j;
      }
    }
    return out;
  }

  std::string pair_key(LayerPair p) const { return layers_[p.first].key() + "|" + layers_[p.second].key(); }

  bool operator==(const MultilayerNetwork& o) const {
    return registry_ == o.registry_ && layers_ == o.layers_ && couplings_ == o.couplings_;
  }

 private:
  void set_couplings(std::vector<LayerPair> couplings) {
    for (auto& p : couplings) {
      if (p.first == p.second) throw DataError("a layer cannot be coupled to itself");
      if (p.first >= layers_.size() || p.second >= layers_.size()) throw DataError("coupling references unknown layer");
      p = LayerPair::of(p.first, p.second);
    }
    std::sort(couplings.begin(), couplings.end());
    couplings.erase(std::unique(couplings.begin(), couplings.end()), couplings.end());
    couplings_ = std::move(couplings);
  }

  VertexRegistry registry_;
  std::vector<Layer> layers_;
  std::vector<LayerPair> couplings_;
};

/// Community labels per participating (vertex, layer) pair. labels[l][p] is
/// the label of the p-th participant of layer l. Labels are shared across
/// layers: equal labels in two layers denote the same community.
struct MultilayerPartition {
  std::vector<std::vector<Label>> labels;

  std::size_t layer_count() const noexcept { return labels.size(); }

  /// Distinct labels used in one layer.
  std::size_t community_count(LayerIndex l) const {
    std::vector<Label> copy = labels[l];
    std::sort(copy.begin(), copy.end());
    return static_cast<std::size_t>(std::unique(copy.begin(), copy.end()) - copy.begin());
  }

  bool operator==(const MultilayerPartition&) const = default;
};

/// Throws unless the partition covers exactly the participants of `net`.
inline void check_domain(const MultilayerNetwork& net, const MultilayerPartition& part) {
  if (part.labels.size() != net.layer_count()) {
    throw DataError(fmt::format("partition has {} layers, network has {}", part.labels.size(), net.layer_count()));
  }
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    if (part.labels[l].size() != net.layer(static_cast<LayerIndex>(l)).size()) {
      throw DataError(fmt::format("partition does not cover layer '{}'", net.layer(static_cast<LayerIndex>(l)).key()));
    }
    for (Label g : part.labels[l]) {
      if (g < 0) throw DataError("partition labels must be non-negative");
    }
  }
}

/// Relabels communities to 0, 1, ... by first appearance, scanning layers in
/// order and participants in handle order. A single relabeling is applied to
/// all layers, so cross-layer label identity is preserved. Idempotent.
inline MultilayerPartition canonicalize(const MultilayerPartition& part) {
  MultilayerPartition out;
  out.labels.resize(part.labels.size());
  std::map<Label, Label> relabel;
  for (std::size_t l = 0; l < part.labels.size(); ++l) {
    out.labels[l].reserve(part.labels[l].size());
    for (Label g : part.labels[l]) {
      auto [it, inserted] = relabel.try_emplace(g, static_cast<Label>(relabel.size()));
      out.labels[l].push_back(it->second);
    }
  }
  return out;
}

/// Resolution, coupling, layer weight and community cap per layer.
struct ModelParams {
  std::vector<double> gamma;
  std::vector<double> beta;
  /// 0 means unbounded.
  std::vector<int> k_max;
  std::map<LayerPair, double> omega;

  static ModelParams uniform(const MultilayerNetwork& net, double gamma, double omega, int k_max = 0) {
    ModelParams p;
    p.gamma.assign(net.layer_count(), gamma);
    p.beta.assign(net.layer_count(), 1.0);
    p.k_max.assign(net.layer_count(), k_max);
    for (auto pair : net.couplings()) p.omega[pair] = omega;
    return p;
  }

  double omega_for(LayerPair pair) const {
    auto it = omega.find(pair);
    return it == omega.end() ? 0.0 : it->second;
  }

  void validate(const MultilayerNetwork& net) const {
    const auto n = net.layer_count();
    if (gamma.size() != n || beta.size() != n || k_max.size() != n) {
      throw DataError("model parameters do not match the layer count");
    }
    for (std::size_t l = 0; l < n; ++l) {
      if (!(gamma[l] > 0.0)) throw DataError(fmt::format("gamma must be > 0 (layer {})", l));
      if (!(beta[l] > 0.0)) throw DataError(fmt::format("beta must be > 0 (layer {})", l));
      if (k_max[l] < 0) throw DataError("k_max must be positive or 0 for unbounded");
    }
    for (const auto& [pair, w] : omega) {
      if (!(w >= 0.0)) throw DataError("omega must be >= 0");
      if (pair.second >= n) throw DataError("omega references unknown layer");
    }
  }

  bool operator==(const ModelParams&) const = default;
};

}  // namespace coalmux
