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
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>

#include "coalmux/netmodel.hpp"
#include "coalmux/rng.hpp"
#include "coalmux/supra.hpp"

// Leiden-style maximizer of multilayer modularity with a hard cap on the
// number of communities per layer.
//
// Communities are global across layers. Every node (original or aggregate)
// carries a per-layer vector of null-model strength and of original-node
// counts, so the resolution of each layer and the per-layer cap stay
// well-defined after aggregation. Gains are differences of the same
// unnormalized Q that supra_quality evaluates.

namespace coalmux {

struct LeidenOptions {
  /// Randomness of the refinement merge choice.
  double theta = 0.01;
  int max_iterations = 100;
  /// Minimum gain for a move to count as an improvement.
  double tolerance = 1e-10;
  /// Recompute Q from scratch after every phase and compare with the
  /// incrementally tracked value. Throws std::logic_error on drift > 1e-9.
  bool verify = false;
};

namespace leiden {

/// One level of the Leiden hierarchy.
struct LevelGraph {
  std::size_t n = 0;
  std::size_t layers = 0;
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> targets;
  std::vector<double> weights;
  /// n x layers, row-major.
  std::vector<double> deg;
  std::vector<int> count;
  std::vector<double> coef;
  std::vector<int> k_max;

  double d(std::size_t u, std::size_t s) const { return deg[u * layers + s]; }
  int c(std::size_t u, std::size_t s) const { return count[u * layers + s]; }
};

/// Level graph over a subset of supra nodes (given in increasing order).
inline LevelGraph level_from_supra(const SupraGraph& sg, std::span<const std::uint32_t> nodes) {
  LevelGraph g;
  g.n = nodes.size();
  g.layers = sg.layer_count;
  g.coef = sg.null_coef;
  g.k_max = sg.k_max;
  g.deg.assign(g.n * g.layers, 0.0);
  g.count.assign(g.n * g.layers, 0);
  std::vector<std::int64_t> local(sg.size(), -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) local[nodes[i]] = static_cast<std::int64_t>(i);
  g.offsets.assign(g.n + 1, 0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto u = nodes[i];
    g.deg[i * g.layers + sg.node_layer[u]] = sg.degree[u];
    g.count[i * g.layers + sg.node_layer[u]] = 1;
    auto nb = sg.neighbors(u);
    auto wt = sg.neighbor_weights(u);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      if (local[nb[k]] < 0 || nb[k] == u) continue;
      g.targets.push_back(static_cast<std::uint32_t>(local[nb[k]]));
      g.weights.push_back(wt[k]);
    }
    g.offsets[i + 1] = g.targets.size();
  }
  return g;
}

/// Community assignment of a level graph with per-(community, layer) totals.
class Communities {
 public:
  Communities(const LevelGraph& g, std::vector<std::uint32_t> assignment)
      : g_(&g), comm_(std::move(assignment)) {
    const std::size_t n = g.n;
    const std::size_t L = g.layers;
    total_.assign(n * L, 0.0);
    presence_.assign(n * L, 0);
    size_.assign(n, 0);
    layer_communities_.assign(L, 0);
    for (std::size_t u = 0; u < n; ++u) {
      const auto c = comm_[u];
      ++size_[c];
      for (std::size_t s = 0; s < L; ++s) {
        total_[c * L + s] += g.d(u, s);
        if (g.c(u, s) > 0 && presence_[c * L + s] == 0) ++layer_communities_[s];
        presence_[c * L + s] += g.c(u, s);
      }
    }
    for (std::uint32_t c = 0; c < n; ++c) {
      if (size_[c] == 0) empty_.insert(c);
    }
  }

  std::uint32_t of(std::size_t u) const { return comm_[u]; }
  const std::vector<std::uint32_t>& assignment() const { return comm_; }
  double total(std::uint32_t c, std::size_t s) const { return total_[c * g_->layers + s]; }
  int presence(std::uint32_t c, std::size_t s) const { return presence_[c * g_->layers + s]; }
  int layer_communities(std::size_t s) const { return layer_communities_[s]; }
  std::size_t size(std::uint32_t c) const { return size_[c]; }
  std::size_t community_count() const { return g_->n - empty_.size(); }

  /// Smallest unused community id, or n when none is free.
  std::uint32_t free_community() const {
    return empty_.empty() ? static_cast<std::uint32_t>(g_->n) : *empty_.begin();
  }

  /// True when moving u to `to` does not push any layer past its cap. A move
  /// that creates a new community in layer s is allowed only while that
  /// layer is below its cap; moves that keep or lower the count always are.
  bool allowed(std::size_t u, std::uint32_t to) const {
    const auto from = comm_[u];
    if (from == to) return true;
    for (std::size_t s = 0; s < g_->layers; ++s) {
      const int cu = g_->c(u, s);
      if (cu == 0 || g_->k_max[s] <= 0) continue;
      const bool appears = presence(to, s) == 0;
      const bool vanishes = presence(from, s) == cu;
      if (appears && !vanishes && layer_communities_[s] >= g_->k_max[s]) return false;
    }
    return true;
  }

  void move(std::size_t u, std::uint32_t to) {
    const auto from = comm_[u];
    if (from == to) return;
    const std::size_t L = g_->layers;
    for (std::size_t s = 0; s < L; ++s) {
      const int cu = g_->c(u, s);
      total_[from * L + s] -= g_->d(u, s);
      total_[to * L + s] += g_->d(u, s);
      if (cu == 0) continue;
      presence_[from * L + s] -= cu;
      if (presence_[from * L + s] == 0) --layer_communities_[s];
      if (presence_[to * L + s] == 0) ++layer_communities_[s];
      presence_[to * L + s] += cu;
    }
    if (--size_[from] == 0) empty_.insert(from);
    if (size_[to]++ == 0) empty_.erase(to);
    comm_[u] = to;
  }

  /// Null-model mass between u and the members of community c other than u:
  /// sum_s coef_s d_u[s] (K_s(c) - [u in c] d_u[s]).
  double null_mass(std::size_t u, std::uint32_t c) const {
    double mass = 0.0;
    const bool inside = comm_[u] == c;
    for (std::size_t s = 0; s < g_->layers; ++s) {
      const double du = g_->d(u, s);
      if (du == 0.0) continue;
      mass += g_->coef[s] * du * (total(c, s) - (inside ? du : 0.0));
    }
    return mass;
  }

  bool over_cap() const {
    for (std::size_t s = 0; s < g_->layers; ++s) {
      if (g_->k_max[s] > 0 && layer_communities_[s] > g_->k_max[s]) return true;
    }
    return false;
  }

 private:
  const LevelGraph* g_;
  std::vector<std::uint32_t> comm_;
  std::vector<double> total_;
  std::vector<int> presence_;
  std::vector<std::size_t> size_;
  std::vector<int> layer_communities_;
  std::set<std::uint32_t> empty_;
};

struct MoveDecision {
  std::uint32_t target = 0;
  double gain = 0.0;
  bool moves = false;
};

/// Scratch buffer for per-community edge weight sums around one node.
class NeighborWeights {
 public:
  explicit NeighborWeights(std::size_t n) : weight_(n + 1, 0.0), seen_(n + 1, 0) {}

  template <typename KeyFn>
  void gather(const LevelGraph& g, std::size_t u, KeyFn key) {
    clear();
    for (std::size_t k = g.offsets[u]; k < g.offsets[u + 1]; ++k) {
      const auto c = key(g.targets[k]);
      if (c == kSkip) continue;
      if (!seen_[c]) {
        seen_[c] = 1;
        touched_.push_back(c);
      }
      weight_[c] += g.weights[k];
    }
    std::sort(touched_.begin(), touched_.end());
  }

  void clear() {
    for (auto c : touched_) {
      weight_[c] = 0.0;
      seen_[c] = 0;
    }
    touched_.clear();
  }

  double operator[](std::uint32_t c) const { return weight_[c]; }
  const std::vector<std::uint32_t>& touched() const { return touched_; }

  static constexpr std::uint32_t kSkip = std::numeric_limits<std::uint32_t>::max();

 private:
  std::vector<double> weight_;
  std::vector<char> seen_;
  std::vector<std::uint32_t> touched_;
};

/// Best admissible move for node u. Candidates are the neighbouring
/// communities plus a fresh community when the caps allow one. The node moves
/// only for a gain above `tolerance`; equal gains go to the lowest id.
inline MoveDecision best_move(const LevelGraph& g, const Communities& comms, NeighborWeights& nw, std::size_t u,
                              double tolerance) {
  nw.gather(g, u, [&](std::uint32_t v) { return v == u ? NeighborWeights::kSkip : comms.of(v); });
  const auto from = comms.of(u);
  const double stay = nw[from] - comms.null_mass(u, from);

  MoveDecision best{from, 0.0, false};
  auto consider = [&](std::uint32_t c, double gain) {
    if (gain <= tolerance) return;
    if (!best.moves || gain > best.gain + tolerance ||
        (std::abs(gain - best.gain) <= tolerance && c < best.target)) {
      if (!comms.allowed(u, c)) return;
      best = {c, gain, true};
    }
  };
  for (auto c : nw.touched()) {
    if (c == from) continue;
    consider(c, nw[c] - comms.null_mass(u, c) - stay);
  }
  if (comms.size(from) > 1) {
    const auto fresh = comms.free_community();
    if (fresh < g.n) consider(fresh, -stay);
  }
  return best;
}

/// Queue-based local moving. Returns the number of moves; adds gains to q.
inline std::size_t move_nodes(const LevelGraph& g, Communities& comms, CounterRng& rng, double tolerance,
                              double& q) {
  std::vector<std::uint32_t> order(g.n);
  std::iota(order.begin(), order.end(), 0u);
  rng.shuffle(std::span<std::uint32_t>(order));
  std::vector<std::uint32_t> queue(order.begin(), order.end());
  std::vector<char> queued(g.n, 1);
  std::size_t head = 0;
  std::size_t moves = 0;
  NeighborWeights nw(g.n);
  while (head < queue.size()) {
    const auto u = queue[head++];
    queued[u] = 0;
    auto decision = best_move(g, comms, nw, u, tolerance);
    if (!decision.moves) continue;
    comms.move(u, decision.target);
    q += decision.gain;
    ++moves;
    for (std::size_t k = g.offsets[u]; k < g.offsets[u + 1]; ++k) {
      const auto v = g.targets[k];
      if (!queued[v] && comms.of(v) != decision.target) {
        queued[v] = 1;
        queue.push_back(v);
      }
    }
    if (head > g.n && head * 2 > queue.size()) {
      queue.erase(queue.begin(), queue.begin() + static_cast<std::ptrdiff_t>(head));
      head = 0;
    }
  }
  return moves;
}

/// Merges whole communities until every layer respects its cap. Each step
/// merges the pair, co-present in an over-cap layer, whose merge loses the
/// least Q. Returns the number of merges.
inline std::size_t enforce_caps(const LevelGraph& g, Communities& comms, double& q) {
  std::size_t merges = 0;
  while (comms.over_cap()) {
    std::vector<std::uint32_t> live;
    std::vector<std::int64_t> slot(g.n, -1);
    for (std::uint32_t c = 0; c < g.n; ++c) {
      if (comms.size(c) > 0) {
        slot[c] = static_cast<std::int64_t>(live.size());
        live.push_back(c);
      }
    }
    const std::size_t nl = live.size();
    std::vector<double> between(nl * nl, 0.0);
    for (std::size_t u = 0; u < g.n; ++u) {
      for (std::size_t k = g.offsets[u]; k < g.offsets[u + 1]; ++k) {
        const auto v = g.targets[k];
        if (v <= u) continue;
        const auto a = static_cast<std::size_t>(slot[comms.of(u)]);
        const auto b = static_cast<std::size_t>(slot[comms.of(v)]);
        if (a == b) continue;
        between[std::min(a, b) * nl + std::max(a, b)] += g.weights[k];
      }
    }
    bool found = false;
    double best_gain = 0.0;
    std::pair<std::uint32_t, std::uint32_t> best_pair{0, 0};
    for (std::size_t i = 0; i < nl; ++i) {
      for (std::size_t j = i + 1; j < nl; ++j) {
        const auto a = live[i];
        const auto b = live[j];
        bool relieves = false;
        double null = 0.0;
        for (std::size_t s = 0; s < g.layers; ++s) {
          null += g.coef[s] * comms.total(a, s) * comms.total(b, s);
          if (g.k_max[s] > 0 && comms.layer_communities(s) > g.k_max[s] && comms.presence(a, s) > 0 &&
              comms.presence(b, s) > 0) {
            relieves = true;
          }
        }
        if (!relieves) continue;
        const double gain = between[i * nl + j] - null;
        if (!found || gain > best_gain) {
          found = true;
          best_gain = gain;
          best_pair = {a, b};
        }
      }
    }
    if (!found) throw std::logic_error("community cap cannot be satisfied");
    for (std::size_t u = 0; u < g.n; ++u) {
      if (comms.of(u) == best_pair.second) comms.move(u, best_pair.first);
    }
    q += best_gain;
    ++merges;
  }
  return merges;
}

/// Leiden refinement: within each community, singletons merge into
/// well-connected sub-communities with probability proportional to
/// exp(gain / theta), gain >= 0. Sub-communities never leave their parent, so
/// the per-layer community counts of `comms` are untouched. `gain_sum`
/// accumulates Q(refined) - Q(all singletons).
inline std::vector<std::uint32_t> refine(const LevelGraph& g, const Communities& comms, CounterRng& rng,
                                         double theta, double tolerance, double& gain_sum) {
  const std::size_t n = g.n;
  const std::size_t L = g.layers;
  std::vector<std::uint32_t> ref(n);
  std::iota(ref.begin(), ref.end(), 0u);
  std::vector<std::size_t> ref_size(n, 1);
  std::vector<double> ref_total(g.deg);
  // Weight from each sub-community to the rest of its parent community.
  std::vector<double> ref_external(n, 0.0);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t k = g.offsets[u]; k < g.offsets[u + 1]; ++k) {
      const auto v = g.targets[k];
      if (v != u && comms.of(v) == comms.of(u)) ref_external[u] += g.weights[k];
    }
  }
  auto parent_null = [&](std::uint32_t t, std::uint32_t parent) {
    double mass = 0.0;
    for (std::size_t s = 0; s < L; ++s) {
      const double kt = ref_total[t * L + s];
      if (kt != 0.0) mass += g.coef[s] * kt * (comms.total(parent, s) - kt);
    }
    return mass;
  };

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  rng.shuffle(std::span<std::uint32_t>(order));
  NeighborWeights nw(n);
  std::vector<std::pair<std::uint32_t, double>> candidates;
  for (auto v : order) {
    if (ref[v] != v || ref_size[v] != 1) continue;
    const auto parent = comms.of(v);
    if (ref_external[v] < parent_null(v, parent) - tolerance) continue;
    nw.gather(g, v, [&](std::uint32_t x) {
      return (x == v || comms.of(x) != parent) ? NeighborWeights::kSkip : ref[x];
    });
    candidates.clear();
    candidates.emplace_back(v, 0.0);
    double max_gain = 0.0;
    for (auto t : nw.touched()) {
      if (t == v) continue;
      if (ref_external[t] < parent_null(t, parent) - tolerance) continue;
      double null = 0.0;
      for (std::size_t s = 0; s < L; ++s) {
        const double dv = g.d(v, s);
        if (dv != 0.0) null += g.coef[s] * dv * ref_total[t * L + s];
      }
      const double gain = nw[t] - null;
      if (gain < 0.0) continue;
      candidates.emplace_back(t, gain);
      max_gain = std::max(max_gain, gain);
    }
    if (candidates.size() == 1) continue;
    double total_w = 0.0;
    for (auto& [t, gain] : candidates) total_w += std::exp((gain - max_gain) / theta);
    double draw = rng.uniform() * total_w;
    std::uint32_t chosen = candidates.back().first;
    double chosen_gain = candidates.back().second;
    for (auto& [t, gain] : candidates) {
      draw -= std::exp((gain - max_gain) / theta);
      if (draw < 0.0) {
        chosen = t;
        chosen_gain = gain;
        break;
      }
    }
    if (chosen == v) continue;
    ref[v] = chosen;
    ref_size[v] = 0;
    ++ref_size[chosen];
    for (std::size_t s = 0; s < L; ++s) ref_total[chosen * L + s] += g.d(v, s);
    ref_external[chosen] += ref_external[v] - 2.0 * nw[chosen];
    gain_sum += chosen_gain;
  }
  return ref;
}

/// Collapses each group of `ref` into one node. Returns the new level graph
/// and writes the node -> aggregate map to `map`.
inline LevelGraph aggregate(const LevelGraph& g, const std::vector<std::uint32_t>& ref,
                            std::vector<std::uint32_t>& map) {
  const std::size_t L = g.layers;
  map.assign(g.n, 0);
  std::vector<std::int64_t> dense(g.n, -1);
  std::uint32_t next = 0;
  for (std::size_t u = 0; u < g.n; ++u) {
    if (dense[ref[u]] < 0) dense[ref[u]] = next++;
    map[u] = static_cast<std::uint32_t>(dense[ref[u]]);
  }
  LevelGraph agg;
  agg.n = next;
  agg.layers = L;
  agg.coef = g.coef;
  agg.k_max = g.k_max;
  agg.deg.assign(agg.n * L, 0.0);
  agg.count.assign(agg.n * L, 0);
  std::vector<SupraEdge> edges;
  for (std::size_t u = 0; u < g.n; ++u) {
    for (std::size_t s = 0; s < L; ++s) {
      agg.deg[map[u] * L + s] += g.d(u, s);
      agg.count[map[u] * L + s] += g.c(u, s);
    }
    for (std::size_t k = g.offsets[u]; k < g.offsets[u + 1]; ++k) {
      const auto a = map[u];
      const auto b = map[g.targets[k]];
      if (a != b) edges.push_back({a, b, g.weights[k]});
    }
  }
  std::sort(edges.begin(), edges.end(),
            [](const SupraEdge& x, const SupraEdge& y) { return x.u != y.u ? x.u < y.u : x.v < y.v; });
  agg.offsets.assign(agg.n + 1, 0);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (i > 0 && edges[i].u == edges[i - 1].u && edges[i].v == edges[i - 1].v) {
      agg.weights.back() += edges[i].weight;
      continue;
    }
    agg.targets.push_back(edges[i].v);
    agg.weights.push_back(edges[i].weight);
    ++agg.offsets[edges[i].u + 1];
  }
  for (std::size_t u = 0; u < agg.n; ++u) agg.offsets[u + 1] += agg.offsets[u];
  return agg;
}

/// Modularity of a group assignment, from scratch. Nodes outside the group
/// are left as singletons, which contribute nothing.
inline double level_quality(const SupraGraph& sg, std::span<const std::uint32_t> nodes,
                            std::span<const std::uint32_t> labels) {
  std::vector<Label> full(sg.size(), -1);
  Label next = static_cast<Label>(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) full[nodes[i]] = static_cast<Label>(labels[i]);
  for (auto& x : full) {
    if (x < 0) x = next++;
  }
  return supra_quality(sg, full);
}

/// Runs the Leiden loop on the supra nodes `nodes` (one coupling group).
/// Returns one community id per entry of `nodes`.
inline std::vector<std::uint32_t> run_group(const SupraGraph& sg, std::span<const std::uint32_t> nodes,
                                            std::uint64_t seed, const LeidenOptions& opt) {
  const LevelGraph base = level_from_supra(sg, nodes);
  CounterRng rng(seed);
  std::vector<std::uint32_t> partition(base.n);
  std::iota(partition.begin(), partition.end(), 0u);
  if (base.n == 0) return partition;

  double q = opt.verify ? level_quality(sg, nodes, partition) : 0.0;
  auto check = [&](const char* phase, const std::vector<std::uint32_t>& flat) {
    if (!opt.verify) return;
    const double fresh = level_quality(sg, nodes, flat);
    if (std::abs(fresh - q) > 1e-9 * std::max(1.0, std::abs(fresh))) {
      throw std::logic_error(fmt::format("Q drift after {}: tracked {} vs recomputed {}", phase, q, fresh));
    }
  };

  for (int iteration = 0; iteration < opt.max_iterations; ++iteration) {
    const auto before = partition;
    LevelGraph level = base;
    Communities comms(level, partition);
    std::vector<std::uint32_t> to_level(base.n);
    std::iota(to_level.begin(), to_level.end(), 0u);
    auto flatten = [&] {
      std::vector<std::uint32_t> flat(base.n);
      for (std::size_t i = 0; i < base.n; ++i) flat[i] = comms.assignment()[to_level[i]];
      return flat;
    };

    while (true) {
      move_nodes(level, comms, rng, opt.tolerance, q);
      check("local moving", flatten());
      if (comms.over_cap()) {
        enforce_caps(level, comms, q);
        check("cap enforcement", flatten());
        move_nodes(level, comms, rng, opt.tolerance, q);
        check("local moving", flatten());
      }
      if (comms.community_count() == level.n) break;
      double refined_gain = 0.0;
      auto ref = refine(level, comms, rng, opt.theta, opt.tolerance, refined_gain);
      if (opt.verify) {
        std::vector<std::uint32_t> singles(base.n), refined(base.n);
        for (std::size_t i = 0; i < base.n; ++i) {
          singles[i] = to_level[i];
          refined[i] = ref[to_level[i]];
        }
        const double expected = level_quality(sg, nodes, singles) + refined_gain;
        const double fresh = level_quality(sg, nodes, refined);
        if (std::abs(fresh - expected) > 1e-9 * std::max(1.0, std::abs(fresh))) {
          throw std::logic_error(fmt::format("Q drift after refinement: tracked {} vs recomputed {}", expected, fresh));
        }
      }
      std::vector<std::uint32_t> map;
      LevelGraph next = aggregate(level, ref, map);
      if (next.n == level.n) break;
      // Parent community of each aggregate, relabelled densely.
      std::vector<std::int64_t> dense(level.n, -1);
      std::vector<std::uint32_t> next_assign(next.n);
      std::uint32_t label = 0;
      for (std::size_t u = 0; u < level.n; ++u) {
        const auto c = comms.of(u);
        if (dense[c] < 0) dense[c] = label++;
        next_assign[map[u]] = static_cast<std::uint32_t>(dense[c]);
      }
      for (auto& t : to_level) t = map[t];
      level = std::move(next);
      comms = Communities(level, std::move(next_assign));
      check("aggregation", flatten());
    }
    partition = flatten();
    // Dense relabel so ids stay below n.
    std::vector<std::int64_t> dense(base.n, -1);
    std::uint32_t label = 0;
    for (auto& c : partition) {
      if (dense[c] < 0) dense[c] = label++;
      c = static_cast<std::uint32_t>(dense[c]);
    }
    if (partition == before) return partition;
  }
  // Iteration budget exhausted: finish with node-level moves so the result is
  // still move-stable.
  Communities comms(base, partition);
  move_nodes(base, comms, rng, opt.tolerance, q);
  return comms.assignment();
}

}  // namespace leiden

/// Maximizes multilayer modularity on a prepared supra-graph. Each coupling
/// group is optimized independently with a seed salted by its first layer's
/// key, so uncoupled layers give the same result as when run alone.
inline std::vector<Label> maximize_supra(const SupraGraph& sg, std::uint64_t seed, const LeidenOptions& opt = {}) {
  std::vector<Label> labels(sg.size(), 0);
  Label offset = 0;
  for (const auto& group : sg.layer_groups) {
    std::vector<std::uint32_t> nodes;
    for (auto l : group) {
      for (auto u = sg.layer_offset[l]; u < sg.layer_offset[l + 1]; ++u) nodes.push_back(static_cast<std::uint32_t>(u));
    }
    if (nodes.empty()) continue;
    auto result = leiden::run_group(sg, nodes, hash_combine(seed, sg.layer_salt[group.front()]), opt);
    Label top = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      labels[nodes[i]] = offset + static_cast<Label>(result[i]);
      top = std::max(top, static_cast<Label>(result[i]) + 1);
    }
    offset += top;
  }
  return labels;
}

/// Local optimum of multilayer modularity under single-node moves, with
/// connected communities and at most K_max communities per capped layer.
/// Deterministic in (net, params, seed). The result is canonicalized.
inline MultilayerPartition maximize(const MultilayerNetwork& net, const ModelParams& params, std::uint64_t seed,
                                    const LeidenOptions& opt = {}) {
  const SupraGraph sg = build_supra(net, params);
  return canonicalize(partition_from_nodes(sg, maximize_supra(sg, seed, opt)));
}

}  // namespace coalmux
