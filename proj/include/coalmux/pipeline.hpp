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
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "coalmux/error.hpp"
#include "coalmux/leiden.hpp"
#include "coalmux/netmodel.hpp"
#include "coalmux/quality.hpp"
#include "coalmux/rng.hpp"
#include "coalmux/supra.hpp"

namespace coalmux {

enum class SelectionMode { kMultilayer, kMonolayer };

inline std::string_view to_string(SelectionMode m) {
  return m == SelectionMode::kMultilayer ? "multilayer" : "monolayer";
}

inline SelectionMode parse_mode(std::string_view s) {
  if (s == "multilayer") return SelectionMode::kMultilayer;
  if (s == "monolayer") return SelectionMode::kMonolayer;
  throw UsageError(fmt::format("unknown mode '{}'", s));
}

struct SelectionConfig {
  std::vector<double> gamma_grid{0.6, 0.8, 1.0, 1.2, 1.4};
  std::vector<double> omega_grid{0.0, 0.25, 0.5, 1.0, 2.0};
  double step_gamma = 0.05;
  double step_omega = 0.05;
  /// Maximizer runs per evaluation.
  int runs = 10;
  int max_passes = 50;
  int consensus_iterations = 20;
  std::uint64_t base_seed = 0;
  /// Community cap applied to every layer; 0 means unbounded.
  int k_max = 0;
  SelectionMode mode = SelectionMode::kMultilayer;
  /// Worker threads; 0 reads COALMUX_THREADS and defaults to 1.
  unsigned threads = 0;
  LeidenOptions leiden;

  void validate() const {
    if (gamma_grid.empty()) throw UsageError("gamma grid is empty");
    if (mode == SelectionMode::kMultilayer && omega_grid.empty()) throw UsageError("omega grid is empty");
    for (double g : gamma_grid) {
      if (!(g > 0.0)) throw UsageError(fmt::format("gamma grid values must be > 0, got {}", g));
    }
    for (double w : omega_grid) {
      if (!(w >= 0.0)) throw UsageError(fmt::format("omega grid values must be >= 0, got {}", w));
    }
    if (!(step_gamma > 0.0) || !(step_omega > 0.0)) throw UsageError("steps must be > 0");
    if (runs < 1) throw UsageError("runs must be >= 1");
    if (max_passes < 1) throw UsageError("max_passes must be >= 1");
    if (consensus_iterations < 1) throw UsageError("consensus iterations must be >= 1");
    if (k_max < 0) throw UsageError("k_max must be >= 0");
  }
};

inline constexpr double kGammaFloor = 0.05;

/// Thread count from COALMUX_THREADS (default 1). Results never depend on it.
inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("COALMUX_THREADS")) {
    unsigned n = 0;
    const std::string_view s(env);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
    if (ec == std::errc{} && ptr == s.data() + s.size() && n > 0) return n;
  }
  return 1;
}

/// Runs fn(0..count-1) on up to `threads` workers. Each index writes its own
/// slot, so the result is independent of scheduling.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  const auto workers = std::min<std::size_t>(threads, count);
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Consensus
// ---------------------------------------------------------------------------

struct ConsensusOptions {
  int max_iterations = 20;
  /// Reclusterings of the co-assignment graph per iteration.
  int runs = 10;
  std::uint64_t seed = 0;
  std::vector<int> k_max;
  /// Cross-layer pairs whose same-vertex co-assignment enters the graph.
  std::vector<LayerPair> pairs;
  unsigned threads = 1;
  LeidenOptions leiden;
};

struct ConsensusResult {
  MultilayerPartition partition;
  int iterations = 0;
  bool converged = false;
};

using Scorer = std::function<double(const MultilayerPartition&)>;

namespace detail {

/// Co-assignment graph of an ensemble: within-layer pairs and same-vertex
/// pairs of the listed layer pairs, weighted by the fraction of members that
/// share a label. Returns nullopt when every weight is 0 or 1.
inline std::optional<SupraGraph> coassignment_graph(const MultilayerNetwork& net,
                                                    const std::vector<MultilayerPartition>& parts,
                                                    const ConsensusOptions& opt) {
  SupraGraph sg = supra_skeleton(net);
  const double r = static_cast<double>(parts.size());
  bool binary = true;
  std::vector<SupraEdge> edges;
  auto share = [&](LayerIndex s, std::size_t i, LayerIndex t, std::size_t j) {
    int same = 0;
    for (const auto& p : parts) same += p.labels[s][i] == p.labels[t][j];
    if (same != 0 && same != static_cast<int>(parts.size())) binary = false;
    return same / r;
  };
  for (LayerIndex l = 0; l < net.layer_count(); ++l) {
    const std::size_t n = net.layer(l).size();
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double d = share(l, i, l, j);
        if (d == 0.0) continue;
        const auto u = static_cast<std::uint32_t>(sg.node(l, static_cast<std::uint32_t>(i)));
        const auto v = static_cast<std::uint32_t>(sg.node(l, static_cast<std::uint32_t>(j)));
        edges.push_back({u, v, d});
        sg.degree[u] += d;
        sg.degree[v] += d;
        m += d;
      }
    }
    sg.null_coef[l] = m > 0.0 ? 1.0 / (2.0 * m) : 0.0;
    sg.k_max[l] = opt.k_max.empty() ? 0 : opt.k_max[l];
  }
  sg.intra_edge_count = edges.size();
  for (auto pair : opt.pairs) {
    for (auto [ps, pr] : net.shared_positions(pair.first, pair.second)) {
      const double d = share(pair.first, ps, pair.second, pr);
      if (d == 0.0) continue;
      edges.push_back({static_cast<std::uint32_t>(sg.node(pair.first, ps)),
                       static_cast<std::uint32_t>(sg.node(pair.second, pr)), d});
      ++sg.inter_edge_count;
    }
  }
  if (binary) return std::nullopt;
  sg.layer_groups = coupling_groups(net.layer_count(), opt.pairs);
  assemble_adjacency(sg, std::move(edges));
  return sg;
}

}  // namespace detail

/// Reconciles an ensemble by repeatedly reclustering its co-assignment graph
/// (modularity at unit resolution, same caps) until all members agree. After
/// `max_iterations` without agreement the best-scoring input is returned.
inline ConsensusResult consensus(const MultilayerNetwork& net, const std::vector<MultilayerPartition>& inputs,
                                 const Scorer& scorer, const ConsensusOptions& opt) {
  if (inputs.empty()) throw DataError("consensus needs at least one partition");
  for (const auto& p : inputs) check_domain(net, p);
  std::vector<MultilayerPartition> ensemble = inputs;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    auto graph = detail::coassignment_graph(net, ensemble, opt);
    if (!graph) return {canonicalize(ensemble.front()), it, true};
    std::vector<MultilayerPartition> next(static_cast<std::size_t>(opt.runs));
    parallel_for(next.size(), opt.threads, [&](std::size_t r) {
      const auto seed = hash_combine(opt.seed, hash_combine(static_cast<std::uint64_t>(it), r));
      next[r] = canonicalize(partition_from_nodes(*graph, maximize_supra(*graph, seed, opt.leiden)));
    });
    ensemble = std::move(next);
  }
  std::size_t best = 0;
  double best_score = scorer(inputs[0]);
  for (std::size_t i = 1; i < inputs.size(); ++i) {
    const double s = scorer(inputs[i]);
    if (s > best_score) {
      best = i;
      best_score = s;
    }
  }
  return {canonicalize(inputs[best]), opt.max_iterations, false};
}

// ---------------------------------------------------------------------------
// Label alignment
// ---------------------------------------------------------------------------

/// Layers optimized as separate groups (no positive coupling between them)
/// carry arbitrary label identities. This relabels each group after the
/// first so that its labels agree as often as possible with the groups before
/// it on the shared vertices of coupled layer pairs: pairs of (new, old)
/// labels are matched greedily by overlap, and unmatched labels get fresh
/// ids. Within-group structure is untouched.
inline MultilayerPartition align_groups(const MultilayerNetwork& net, const MultilayerPartition& part,
                                        std::span<const LayerPair> active) {
  const auto groups = coupling_groups(net.layer_count(), active);
  MultilayerPartition out = part;
  if (groups.size() < 2) return out;
  std::vector<int> group_of(net.layer_count(), -1);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (auto l : groups[g]) group_of[l] = static_cast<int>(g);
  }
  Label next_label = 0;
  for (const auto& layer : part.labels) {
    for (Label x : layer) next_label = std::max(next_label, x + 1);
  }
  for (std::size_t g = 1; g < groups.size(); ++g) {
    std::map<std::pair<Label, Label>, std::size_t> overlap;
    for (auto pair : net.couplings()) {
      const int ga = group_of[pair.first];
      const int gb = group_of[pair.second];
      if ((ga == static_cast<int>(g)) == (gb == static_cast<int>(g))) continue;
      if (std::max(ga, gb) > static_cast<int>(g)) continue;
      const bool first_is_new = ga == static_cast<int>(g);
      for (auto [ps, pr] : net.shared_positions(pair.first, pair.second)) {
        const Label a = out.labels[pair.first][ps];
        const Label b = out.labels[pair.second][pr];
        ++overlap[first_is_new ? std::pair(a, b) : std::pair(b, a)];
      }
    }
    std::vector<std::tuple<std::size_t, Label, Label>> candidates;
    for (const auto& [key, count] : overlap) candidates.emplace_back(count, key.first, key.second);
    std::sort(candidates.begin(), candidates.end(), [](const auto& x, const auto& y) {
      if (std::get<0>(x) != std::get<0>(y)) return std::get<0>(x) > std::get<0>(y);
      return std::tie(std::get<1>(x), std::get<2>(x)) < std::tie(std::get<1>(y), std::get<2>(y));
    });
    std::map<Label, Label> mapping;
    std::set<Label> taken;
    for (const auto& [count, from, to] : candidates) {
      if (mapping.contains(from) || taken.contains(to)) continue;
      mapping[from] = to;
      taken.insert(to);
    }
    for (auto l : groups[g]) {
      for (Label& x : out.labels[l]) {
        auto it = mapping.find(x);
        if (it == mapping.end()) it = mapping.emplace(x, next_label++).first;
        x = it->second;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation and selection
// ---------------------------------------------------------------------------

struct Evaluation {
  MultilayerPartition partition;
  ScoreBreakdown scores;
  int consensus_iterations = 0;
  bool consensus_converged = true;
};

inline std::uint64_t run_seed(std::uint64_t base_seed, std::uint64_t eval_index, std::uint64_t run_index) {
  return base_seed ^ mix64(hash_combine(eval_index, run_index));
}

/// R maximizer runs at `params`, reconciled by consensus and scored by P(g).
/// A pure function of its arguments.
inline Evaluation evaluate(const MultilayerNetwork& net, const ModelParams& params, const SelectionConfig& config,
                           std::uint64_t eval_index = 0) {
  params.validate(net);
  const unsigned threads = resolve_threads(config.threads);
  const SupraGraph sg = build_supra(net, params);
  std::vector<MultilayerPartition> runs(static_cast<std::size_t>(config.runs));
  parallel_for(runs.size(), threads, [&](std::size_t r) {
    runs[r] = canonicalize(partition_from_nodes(sg, maximize_supra(sg, run_seed(config.base_seed, eval_index, r),
                                                                   config.leiden)));
  });
  const std::span<const int> caps(params.k_max);
  Scorer scorer = [&](const MultilayerPartition& p) { return total_loglik(net, p, caps).total; };
  ConsensusOptions copt;
  copt.max_iterations = config.consensus_iterations;
  copt.runs = config.runs;
  copt.seed = hash_combine(run_seed(config.base_seed, eval_index, 0), 0xc0c0);
  copt.k_max = params.k_max;
  for (auto pair : net.couplings()) {
    if (params.omega_for(pair) > 0.0) copt.pairs.push_back(pair);
  }
  copt.threads = threads;
  copt.leiden = config.leiden;
  auto merged = consensus(net, runs, scorer, copt);
  Evaluation ev;
  ev.partition = canonicalize(align_groups(net, merged.partition, copt.pairs));
  ev.scores = total_loglik(net, ev.partition, caps);
  ev.consensus_iterations = merged.iterations;
  ev.consensus_converged = merged.converged;
  return ev;
}

struct TraceRecord {
  /// "grid" or "ascent".
  std::string phase;
  int pass = 0;
  /// Parameter varied by an ascent trial ("gamma:<layer>" or
  /// "omega:<A|B>"); empty for grid points.
  std::string parameter;
  ModelParams params;
  double score = 0.0;
  bool accepted = false;
  bool cached = false;
};

struct SelectionTrace {
  SelectionMode mode = SelectionMode::kMultilayer;
  std::vector<TraceRecord> records;
  ModelParams params;
  Evaluation best;
  int passes = 0;
  bool converged = false;
  std::size_t evaluations = 0;
};

namespace detail {

inline double quantize(double x) { return std::round(x * 1e4) / 1e4; }

/// Memoized evaluate keyed by parameters rounded to four decimals. All
/// evaluations share eval_index 0, so a cached value equals a fresh one.
class EvalCache {
 public:
  EvalCache(const MultilayerNetwork& net, const SelectionConfig& config) : net_(net), config_(config) {}

  std::pair<const Evaluation*, bool> get(const ModelParams& params) {
    std::vector<long long> key;
    for (double g : params.gamma) key.push_back(std::llround(g * 1e4));
    for (double b : params.beta) key.push_back(std::llround(b * 1e4));
    for (int k : params.k_max) key.push_back(k);
    for (const auto& [pair, w] : params.omega) key.push_back(std::llround(w * 1e4));
    auto it = cache_.find(key);
    if (it != cache_.end()) return {&it->second, true};
    ++evaluations_;
    auto [ins, _] = cache_.emplace(std::move(key), evaluate(net_, params, config_, 0));
    return {&ins->second, false};
  }

  std::size_t evaluations() const noexcept { return evaluations_; }

 private:
  const MultilayerNetwork& net_;
  const SelectionConfig& config_;
  std::map<std::vector<long long>, Evaluation> cache_;
  std::size_t evaluations_ = 0;
};

inline const MultilayerNetwork& selection_network(const MultilayerNetwork& net, SelectionMode mode,
                                                  std::optional<MultilayerNetwork>& storage) {
  if (mode == SelectionMode::kMultilayer) return net;
  storage = net.with_couplings({});
  return *storage;
}

inline ModelParams grid_scan(const MultilayerNetwork& net, const SelectionConfig& config, EvalCache& cache,
                             SelectionTrace& trace) {
  auto gammas = config.gamma_grid;
  auto omegas = config.mode == SelectionMode::kMultilayer && !net.couplings().empty() ? config.omega_grid
                                                                                       : std::vector<double>{0.0};
  std::sort(gammas.begin(), gammas.end());
  std::sort(omegas.begin(), omegas.end());
  std::optional<ModelParams> best;
  double best_score = 0.0;
  // Smaller omega, then smaller gamma, wins ties: only strict gains replace.
  for (double w : omegas) {
    for (double g : gammas) {
      auto params = ModelParams::uniform(net, quantize(g), quantize(w), config.k_max);
      auto [ev, cached] = cache.get(params);
      const bool accept = !best || ev->scores.total > best_score;
      trace.records.push_back({"grid", 0, "", params, ev->scores.total, accept, cached});
      if (accept) {
        best = params;
        best_score = ev->scores.total;
      }
    }
  }
  return *best;
}

}  // namespace detail

/// Uniform (gamma, omega) grid point with the highest P(g). In monolayer mode
/// couplings are dropped and only the gamma grid is scanned.
inline ModelParams grid_init(const MultilayerNetwork& net, const SelectionConfig& config) {
  config.validate();
  std::optional<MultilayerNetwork> storage;
  const auto& work = detail::selection_network(net, config.mode, storage);
  detail::EvalCache cache(work, config);
  SelectionTrace trace;
  return detail::grid_scan(work, config, cache, trace);
}

/// Grid initialization followed by coordinate ascent: each resolution (layer
/// order), then each coupling (pair order), tries +step and then -step and
/// keeps a trial only if P(g) strictly increases. Sweeps repeat until one
/// makes no update or `max_passes` is reached.
inline SelectionTrace coordinate_ascent(const MultilayerNetwork& net, const SelectionConfig& config) {
  config.validate();
  std::optional<MultilayerNetwork> storage;
  const auto& work = detail::selection_network(net, config.mode, storage);
  detail::EvalCache cache(work, config);
  SelectionTrace trace;
  trace.mode = config.mode;
  ModelParams current = detail::grid_scan(work, config, cache, trace);
  const Evaluation* best = cache.get(current).first;

  for (int pass = 1; pass <= config.max_passes; ++pass) {
    trace.passes = pass;
    bool updated = false;
    auto try_param = [&](const std::string& name, double value, double step, double floor,
                         const std::function<void(ModelParams&, double)>& set) {
      for (double dir : {+1.0, -1.0}) {
        const double candidate = detail::quantize(std::max(floor, value + dir * step));
        if (candidate == value) continue;
        ModelParams trial = current;
        set(trial, candidate);
        auto [ev, cached] = cache.get(trial);
        const bool accept = ev->scores.total > best->scores.total;
        trace.records.push_back({"ascent", pass, name, trial, ev->scores.total, accept, cached});
        if (accept) {
          current = std::move(trial);
          best = ev;
          updated = true;
          return;
        }
      }
    };
    for (LayerIndex l = 0; l < work.layer_count(); ++l) {
      try_param("gamma:" + work.layer(l).key(), current.gamma[l], config.step_gamma, kGammaFloor,
                [l](ModelParams& p, double v) { p.gamma[l] = v; });
    }
    if (config.mode == SelectionMode::kMultilayer) {
      for (auto pair : work.couplings()) {
        try_param("omega:" + work.pair_key(pair), current.omega_for(pair), config.step_omega, 0.0,
                  [pair](ModelParams& p, double v) { p.omega[pair] = v; });
      }
    }
    if (!updated) {
      trace.converged = true;
      break;
    }
  }
  trace.params = current;
  trace.best = *best;
  trace.evaluations = cache.evaluations();
  return trace;
}

/// Best-fitting model without couplings: the same ascent over per-layer
/// resolutions only. The inter map lists every coupled pair of `net` at 0.
inline SelectionTrace run_monolayer_baseline(const MultilayerNetwork& net, SelectionConfig config) {
  config.mode = SelectionMode::kMonolayer;
  auto trace = coordinate_ascent(net, config);
  for (auto pair : net.couplings()) trace.best.scores.inter[pair] = 0.0;
  return trace;
}

}  // namespace coalmux
