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
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "coalmux/error.hpp"
#include "coalmux/netmodel.hpp"
#include "coalmux/rng.hpp"

namespace coalmux {

enum class Structure { kPillar, kSemipillar, kHierarchy, kOverlap };

inline std::string_view to_string(Structure s) {
  switch (s) {
    case Structure::kPillar: return "pillar";
    case Structure::kSemipillar: return "semipillar";
    case Structure::kHierarchy: return "hierarchy";
    case Structure::kOverlap: return "overlap";
  }
  return "pillar";
}

inline Structure parse_structure(std::string_view s) {
  if (s == "pillar") return Structure::kPillar;
  if (s == "semipillar") return Structure::kSemipillar;
  if (s == "hierarchy") return Structure::kHierarchy;
  if (s == "overlap") return Structure::kOverlap;
  throw UsageError(fmt::format("unknown structure '{}'", s));
}

/// Recipe for a multilayer network with planted coalitions. Layers are the
/// product of `modes` and `slices`, keyed "<mode>/T<slice>" and ordered by
/// slice, then mode.
struct SyntheticSpec {
  int n = 60;
  int modes = 3;
  int slices = 2;
  int k = 3;
  double p_in = 0.3;
  double p_out = 0.02;
  /// Per-layer inclusion probability of each vertex.
  double participation = 1.0;
  Structure structure = Structure::kPillar;
  double copy_p = 1.0;
  double relabel_q = 0.0;
  /// Optional per-slice overrides; slice 0 entries are ignored for copy_p.
  std::vector<double> copy_p_schedule;
  std::vector<double> relabel_q_schedule;
  /// Modes (or layer keys) whose communities split in two (hierarchy only).
  std::set<std::string> split_layers;
  /// Mode names; defaults to Res, Dis, Com, then M3, M4, ...
  std::vector<std::string> mode_names;
  CouplingTopology coupling = CouplingTopology::kAllPairs;
  std::uint64_t seed = 0;

  std::string mode_name(int m) const {
    if (!mode_names.empty()) return mode_names.at(static_cast<std::size_t>(m));
    static const char* kDefault[] = {"Res", "Dis", "Com"};
    return m < 3 ? kDefault[m] : fmt::format("M{}", m);
  }

  double copy_at(int t) const {
    return copy_p_schedule.empty() ? copy_p : copy_p_schedule.at(static_cast<std::size_t>(t));
  }
  double relabel_at(int t) const {
    return relabel_q_schedule.empty() ? relabel_q : relabel_q_schedule.at(static_cast<std::size_t>(t));
  }

  void validate() const {
    auto prob = [](double x, const char* what) {
      if (!(x >= 0.0 && x <= 1.0)) throw UsageError(fmt::format("{} must lie in [0, 1], got {}", what, x));
    };
    if (n < 1) throw UsageError("n must be >= 1");
    if (modes < 1 || slices < 1) throw UsageError("modes and slices must be >= 1");
    if (k < 1) throw UsageError("k must be >= 1");
    prob(p_in, "p_in");
    prob(p_out, "p_out");
    if (!(p_out < p_in)) throw UsageError("p_out must be below p_in");
    prob(participation, "participation");
    prob(copy_p, "copy_p");
    prob(relabel_q, "relabel_q");
    for (double x : copy_p_schedule) prob(x, "copy_p schedule entry");
    for (double x : relabel_q_schedule) prob(x, "relabel_q schedule entry");
    if (!copy_p_schedule.empty() && copy_p_schedule.size() != static_cast<std::size_t>(slices)) {
      throw UsageError("copy_p schedule needs one entry per slice");
    }
    if (!relabel_q_schedule.empty() && relabel_q_schedule.size() != static_cast<std::size_t>(slices)) {
      throw UsageError("relabel_q schedule needs one entry per slice");
    }
    if (!mode_names.empty() && mode_names.size() != static_cast<std::size_t>(modes)) {
      throw UsageError("mode_names needs one entry per mode");
    }
  }
};

struct SyntheticNetwork {
  MultilayerNetwork network;
  MultilayerPartition truth;
};

namespace detail {

enum SynthStream : std::uint64_t { kLabels = 1, kCopy, kRelabel, kParticipation, kEdges, kPower };

inline CounterRng synth_rng(std::uint64_t seed, SynthStream purpose, std::uint64_t index) {
  return CounterRng(hash_combine(seed, purpose), index);
}

}  // namespace detail

/// Draws a network and its planted partition. Every random decision uses its
/// own counter stream, so changing one knob leaves the other draws intact.
inline SyntheticNetwork generate(const SyntheticSpec& spec) {
  spec.validate();
  const auto n = static_cast<std::size_t>(spec.n);
  const auto k = static_cast<std::uint64_t>(spec.k);

  // Slice labels with temporal copying.
  std::vector<std::vector<Label>> slice_labels(static_cast<std::size_t>(spec.slices), std::vector<Label>(n));
  {
    auto rng = detail::synth_rng(spec.seed, detail::kLabels, 0);
    for (auto& g : slice_labels[0]) g = static_cast<Label>(rng.below(k));
  }
  for (int t = 1; t < spec.slices; ++t) {
    auto rng = detail::synth_rng(spec.seed, detail::kCopy, static_cast<std::uint64_t>(t));
    const auto& prev = slice_labels[static_cast<std::size_t>(t - 1)];
    auto& cur = slice_labels[static_cast<std::size_t>(t)];
    for (std::size_t v = 0; v < n; ++v) {
      const bool keep = rng.bernoulli(spec.copy_at(t));
      const auto fresh = static_cast<Label>(rng.below(k));
      cur[v] = keep ? prev[v] : fresh;
    }
  }

  VertexRegistry reg;
  {
    auto rng = detail::synth_rng(spec.seed, detail::kPower, 0);
    for (std::size_t v = 0; v < n; ++v) {
      reg.add({fmt::format("a{:03}", v), fmt::format("Actor {}", v), "org", rng.uniform()});
    }
  }

  std::vector<Layer> layers;
  MultilayerPartition truth;
  std::uint64_t layer_index = 0;
  for (int t = 0; t < spec.slices; ++t) {
    const auto& base = slice_labels[static_cast<std::size_t>(t)];
    for (int m = 0; m < spec.modes; ++m, ++layer_index) {
      const std::string mode = spec.mode_name(m);
      const std::string key = fmt::format("{}/T{}", mode, t);
      std::vector<Label> labels = base;
      if (spec.structure == Structure::kHierarchy &&
          (spec.split_layers.contains(mode) || spec.split_layers.contains(key))) {
        // Alternate members of each community (by vertex index) move to a
        // child label k + c; the other half keeps the parent label.
        std::vector<std::size_t> rank(k, 0);
        for (std::size_t v = 0; v < n; ++v) {
          const auto c = static_cast<std::size_t>(base[v]);
          if (rank[c]++ % 2 == 1) labels[v] = static_cast<Label>(spec.k) + base[v];
        }
      }
      if (spec.structure == Structure::kOverlap) {
        auto rng = detail::synth_rng(spec.seed, detail::kRelabel, layer_index);
        for (auto& g : labels) {
          const bool relabel = rng.bernoulli(spec.relabel_at(t));
          const auto fresh = static_cast<Label>(rng.below(k));
          if (relabel) g = fresh;
        }
      }
      std::vector<VertexIndex> participants;
      {
        auto rng = detail::synth_rng(spec.seed, detail::kParticipation, layer_index);
        for (std::size_t v = 0; v < n; ++v) {
          if (rng.bernoulli(spec.participation)) participants.push_back(static_cast<VertexIndex>(v));
        }
      }
      std::vector<std::tuple<VertexIndex, VertexIndex, double>> edges;
      {
        auto rng = detail::synth_rng(spec.seed, detail::kEdges, layer_index);
        for (std::size_t i = 0; i < participants.size(); ++i) {
          for (std::size_t j = i + 1; j < participants.size(); ++j) {
            const bool same = labels[participants[i]] == labels[participants[j]];
            if (rng.bernoulli(same ? spec.p_in : spec.p_out)) edges.emplace_back(participants[i], participants[j], 1.0);
          }
        }
      }
      std::vector<Label> layer_truth;
      layer_truth.reserve(participants.size());
      for (auto v : participants) layer_truth.push_back(labels[v]);
      truth.labels.push_back(std::move(layer_truth));
      layers.push_back(Layer::make(key, LayerId{mode, t}, std::move(participants), edges));
    }
  }
  MultilayerNetwork net(std::move(reg), std::move(layers));
  if (spec.coupling != CouplingTopology::kAllPairs) net = net.with_couplings(net.topology_pairs(spec.coupling));
  return {std::move(net), std::move(truth)};
}

/// Six layers (three modes over two slices) of about a hundred actors with
/// three coalitions that mostly persist in time and deviate a little by mode.
inline SyntheticSpec case_preset() {
  SyntheticSpec spec;
  spec.n = 100;
  spec.modes = 3;
  spec.slices = 2;
  spec.k = 3;
  spec.p_in = 0.3;
  spec.p_out = 0.03;
  spec.participation = 0.9;
  spec.structure = Structure::kOverlap;
  spec.copy_p = 0.9;
  spec.relabel_q = 0.1;
  return spec;
}

}  // namespace coalmux
