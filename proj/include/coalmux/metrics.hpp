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
#include <bit>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <fmt/format.h>

#include "coalmux/error.hpp"
#include "coalmux/netmodel.hpp"
#include "coalmux/rng.hpp"

namespace coalmux {

using BigCount = boost::multiprecision::cpp_int;

// ---------------------------------------------------------------------------
// Contingency tables and reduced mutual information
// ---------------------------------------------------------------------------

struct ContingencyTable {
  std::vector<Label> row_labels;
  std::vector<Label> col_labels;
  /// rows x cols, row-major.
  std::vector<std::int64_t> counts;
  std::vector<std::int64_t> row_sums;
  std::vector<std::int64_t> col_sums;
  std::int64_t n = 0;

  std::int64_t at(std::size_t i, std::size_t j) const { return counts[i * col_labels.size() + j]; }
};

inline ContingencyTable contingency(std::span<const Label> g1, std::span<const Label> g2) {
  if (g1.size() != g2.size()) throw DataError("partitions compared over different domains");
  ContingencyTable t;
  t.row_labels.assign(g1.begin(), g1.end());
  t.col_labels.assign(g2.begin(), g2.end());
  for (auto* v : {&t.row_labels, &t.col_labels}) {
    std::sort(v->begin(), v->end());
    v->erase(std::unique(v->begin(), v->end()), v->end());
  }
  const std::size_t r = t.row_labels.size();
  const std::size_t c = t.col_labels.size();
  t.counts.assign(r * c, 0);
  t.row_sums.assign(r, 0);
  t.col_sums.assign(c, 0);
  auto index = [](const std::vector<Label>& labels, Label g) {
    return static_cast<std::size_t>(std::lower_bound(labels.begin(), labels.end(), g) - labels.begin());
  };
  for (std::size_t k = 0; k < g1.size(); ++k) {
    const auto i = index(t.row_labels, g1[k]);
    const auto j = index(t.col_labels, g2[k]);
    ++t.counts[i * c + j];
    ++t.row_sums[i];
    ++t.col_sums[j];
  }
  t.n = static_cast<std::int64_t>(g1.size());
  return t;
}

struct TableCount {
  /// Exact count, set on the exact path.
  std::optional<BigCount> exact;
  /// Natural log of the (estimated) count.
  double log_count = 0.0;
  /// Standard error of log_count; 0 on the exact path.
  double log_stderr = 0.0;
  bool approximate() const { return !exact.has_value(); }
};

namespace detail {

inline double big_log(const BigCount& x) {
  if (x <= 0) return -std::numeric_limits<double>::infinity();
  const auto bits = boost::multiprecision::msb(x);
  if (bits < 1000) return std::log(x.convert_to<double>());
  const unsigned shift = static_cast<unsigned>(bits - 60);
  BigCount top = x >> shift;
  return std::log(top.convert_to<double>()) + shift * std::log(2.0);
}

/// Vectors c with sum b and 0 <= c_i <= rows_i, counted by a sliding-window
/// DP over rows.
inline BigCount bounded_compositions(const std::vector<int>& rows, int b) {
  std::vector<BigCount> ways(static_cast<std::size_t>(b) + 1, 0), next(ways.size());
  ways[0] = 1;
  for (int r : rows) {
    BigCount window = 0;
    for (int s = 0; s <= b; ++s) {
      window += ways[static_cast<std::size_t>(s)];
      if (s - r - 1 >= 0) window -= ways[static_cast<std::size_t>(s - r - 1)];
      next[static_cast<std::size_t>(s)] = window;
    }
    ways.swap(next);
  }
  return ways[static_cast<std::size_t>(b)];
}

using Wide = __int128;

inline BigCount to_big(Wide x) {
  const bool negative = x < 0;
  unsigned __int128 u = negative ? static_cast<unsigned __int128>(-x) : static_cast<unsigned __int128>(x);
  BigCount out = static_cast<std::uint64_t>(u >> 64);
  out <<= 64;
  out += static_cast<std::uint64_t>(u);
  return negative ? BigCount(-out) : out;
}

inline Wide binomial(Wide n, int k) {
  if (n < k || k < 0) return 0;
  Wide r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Two-row tables with columns `cols` and first-row sum s, i.e. vectors
/// 0 <= x_j <= cols_j with sum s, by inclusion-exclusion over the columns
/// whose upper bound is violated.
inline Wide two_row_tables(const std::vector<int>& cols, int s) {
  const int c = static_cast<int>(cols.size());
  Wide total = 0;
  for (unsigned mask = 0; mask < (1u << c); ++mask) {
    int excess = 0;
    for (int j = 0; j < c; ++j) {
      if (mask & (1u << j)) excess += cols[static_cast<std::size_t>(j)] + 1;
    }
    if (excess > s) continue;
    const Wide term = binomial(s - excess + c - 1, c - 1);
    total += (std::popcount(mask) % 2) ? -term : term;
  }
  return total;
}

/// Tables with at most four rows. The rows are split into a top block of
/// one or two rows and a bottom block of the rest; the count is a sum over
/// the column sums v of the top block of top(v) * bottom(cols - v), where a
/// one-row block has exactly one table and a two-row block is counted in
/// closed form. Exact in 128-bit arithmetic for every table with at most 16
/// cells and n <= 200 (the count is below C(215, 15) < 2^76).
inline Wide small_tables(const std::vector<int>& rows, const std::vector<int>& cols) {
  const std::size_t r = rows.size();
  if (r <= 1) return 1;
  if (r == 2) return two_row_tables(cols, rows[0]);
  if (r > 4) throw NumericError("exact table count supports at most four rows");
  const std::size_t top_rows = r - 2;
  const int top_sum = top_rows == 1 ? rows[0] : rows[0] + rows[1];
  std::vector<int> v(cols.size(), 0), rest(cols.size(), 0);
  Wide total = 0;
  // Suffix capacities prune infeasible prefixes.
  std::vector<int> room(cols.size() + 1, 0);
  for (std::size_t j = cols.size(); j-- > 0;) room[j] = room[j + 1] + cols[j];
  std::function<void(std::size_t, int)> visit = [&](std::size_t j, int left) {
    if (j + 1 == cols.size()) {
      if (left > cols[j]) return;
      v[j] = left;
      for (std::size_t k = 0; k < cols.size(); ++k) rest[k] = cols[k] - v[k];
      const Wide top = top_rows == 1 ? Wide{1} : two_row_tables(v, rows[0]);
      if (top == 0) return;
      total += top * two_row_tables(rest, rows[top_rows]);
      return;
    }
    const int lo = std::max(0, left - room[j + 1]);
    const int hi = std::min(left, cols[j]);
    for (int x = lo; x <= hi; ++x) {
      v[j] = x;
      visit(j + 1, left - x);
    }
  };
  visit(0, top_sum);
  return total;
}

inline std::vector<int> positive_margins(std::span<const std::int64_t> m) {
  std::vector<int> out;
  for (auto x : m) {
    if (x < 0) throw DataError("negative margin");
    if (x > 0) out.push_back(static_cast<int>(x));
  }
  return out;
}

}  // namespace detail

inline constexpr std::size_t kExactMaxCells = 16;
inline constexpr std::int64_t kExactMaxN = 200;

/// Sequential importance sampling estimate of ln(table count): cells are
/// filled column by column with a uniform draw over the feasible range and
/// each table is weighted by the product of range sizes.
inline TableCount estimate_tables(std::span<const std::int64_t> a, std::span<const std::int64_t> b, int samples,
                                  std::uint64_t seed) {
  auto rows = detail::positive_margins(a);
  auto cols = detail::positive_margins(b);
  CounterRng rng(seed, 0x7ab1e5);
  std::vector<double> logw;
  logw.reserve(static_cast<std::size_t>(samples));
  for (int s = 0; s < samples; ++s) {
    std::vector<std::int64_t> left(rows.begin(), rows.end());
    double lw = 0.0;
    for (std::size_t j = 0; j + 1 < cols.size(); ++j) {
      std::int64_t col_left = cols[j];
      std::int64_t rows_after = std::accumulate(left.begin(), left.end(), std::int64_t{0});
      for (std::size_t i = 0; i + 1 < left.size(); ++i) {
        rows_after -= left[i];
        const std::int64_t lo = std::max<std::int64_t>(0, col_left - rows_after);
        const std::int64_t hi = std::min(left[i], col_left);
        const auto pick = lo + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
        lw += std::log(static_cast<double>(hi - lo + 1));
        left[i] -= pick;
        col_left -= pick;
      }
      left.back() -= col_left;
    }
    logw.push_back(lw);
  }
  const double top = *std::max_element(logw.begin(), logw.end());
  double mean = 0.0, sq = 0.0;
  for (double lw : logw) {
    const double w = std::exp(lw - top);
    mean += w;
    sq += w * w;
  }
  mean /= samples;
  sq /= samples;
  const double var = std::max(0.0, sq - mean * mean) / samples;
  TableCount tc;
  tc.log_count = top + std::log(mean);
  tc.log_stderr = std::sqrt(var) / mean;
  return tc;
}

/// Number of non-negative integer matrices with row sums a and column sums
/// b. Exact when the non-zero margins span at most 16 cells and n <= 200;
/// otherwise a flagged sequential-importance-sampling estimate.
inline TableCount count_tables(std::span<const std::int64_t> a, std::span<const std::int64_t> b,
                               int samples = 20000, std::uint64_t seed = 0) {
  const auto na = std::accumulate(a.begin(), a.end(), std::int64_t{0});
  const auto nb = std::accumulate(b.begin(), b.end(), std::int64_t{0});
  if (na != nb) throw DataError(fmt::format("margin totals differ ({} vs {})", na, nb));
  auto rows = detail::positive_margins(a);
  auto cols = detail::positive_margins(b);
  if (rows.size() * cols.size() > kExactMaxCells || na > kExactMaxN) return estimate_tables(a, b, samples, seed);
  // At most four rows after the swap, since rows * cols <= 16.
  if (rows.size() > cols.size()) std::swap(rows, cols);
  TableCount tc;
  if (rows.empty()) {
    tc.exact = BigCount(1);
  } else {
    std::sort(rows.begin(), rows.end());
    tc.exact = detail::to_big(detail::small_tables(rows, cols));
  }
  tc.log_count = detail::big_log(*tc.exact);
  return tc;
}

inline TableCount count_tables(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
  return count_tables(std::span<const std::int64_t>(a), std::span<const std::int64_t>(b));
}

struct RmiResult {
  double value = 0.0;
  /// Plain mutual information (nats) of the pair.
  double mutual_information = 0.0;
  /// Some table count was estimated rather than exact.
  bool approximate = false;
};

/// Mutual information in nats.
inline double mutual_information(const ContingencyTable& t) {
  const double n = static_cast<double>(t.n);
  double mi = 0.0;
  for (std::size_t i = 0; i < t.row_sums.size(); ++i) {
    for (std::size_t j = 0; j < t.col_sums.size(); ++j) {
      const double nij = static_cast<double>(t.at(i, j));
      if (nij == 0.0) continue;
      mi += nij / n * std::log(n * nij / (static_cast<double>(t.row_sums[i]) * static_cast<double>(t.col_sums[j])));
    }
  }
  return mi;
}

/// Reduced mutual information I - ln(Omega(a, b)) / n, in nats. May be
/// negative. The normalized form divides 2 RMI(g1, g2) by
/// RMI(g1, g1) + RMI(g2, g2) and is NaN when that sum is zero.
inline RmiResult rmi(std::span<const Label> g1, std::span<const Label> g2, bool normalized = false) {
  if (g1.empty()) throw NumericError("RMI needs a non-empty common domain");
  auto raw = [](std::span<const Label> x, std::span<const Label> y) {
    const auto t = contingency(x, y);
    const auto omega = count_tables(t.row_sums, t.col_sums);
    RmiResult r;
    r.mutual_information = mutual_information(t);
    r.value = r.mutual_information - omega.log_count / static_cast<double>(t.n);
    r.approximate = omega.approximate();
    return r;
  };
  RmiResult joint = raw(g1, g2);
  if (!normalized) return joint;
  const RmiResult self1 = raw(g1, g1);
  const RmiResult self2 = raw(g2, g2);
  const double denom = self1.value + self2.value;
  RmiResult out = joint;
  out.value = denom == 0.0 ? std::numeric_limits<double>::quiet_NaN() : 2.0 * joint.value / denom;
  out.approximate = joint.approximate || self1.approximate || self2.approximate;
  return out;
}

/// RMI between the partitions of two layers over their shared vertices.
inline std::optional<RmiResult> layer_pair_rmi(const MultilayerNetwork& net, const MultilayerPartition& part,
                                               LayerIndex s, LayerIndex r, bool normalized = true) {
  std::vector<Label> a, b;
  for (auto [ps, pr] : net.shared_positions(s, r)) {
    a.push_back(part.labels[s][ps]);
    b.push_back(part.labels[r][pr]);
  }
  if (a.empty()) return std::nullopt;
  return rmi(a, b, normalized);
}

// ---------------------------------------------------------------------------
// Adaptive external-internal index
// ---------------------------------------------------------------------------

struct AeiReport {
  std::string layer_key;
  Label community_a = 0;
  Label community_b = 0;
  std::size_t m_int = 0;
  std::size_t m_ext = 0;
  double ei_obs = 0.0;
  double ei_null_mean = 0.0;
  double ei_null_sd = 0.0;
  double aei = 0.0;
};

namespace detail {

inline double ei_index(std::size_t m_int, std::size_t m_ext) {
  return (static_cast<double>(m_ext) - static_cast<double>(m_int)) / static_cast<double>(m_ext + m_int);
}

/// E-I statistics of `edges` under `labels`, then of `samples` degree-
/// preserving rewirings (10 |E| double-edge-swap attempts each).
inline AeiReport external_internal(std::vector<std::pair<std::uint32_t, std::uint32_t>> edges,
                                   const std::vector<Label>& labels, int samples, std::uint64_t seed) {
  if (edges.empty()) throw NumericError("AEI needs at least one edge");
  auto count = [&](const std::vector<std::pair<std::uint32_t, std::uint32_t>>& es) {
    std::size_t internal = 0;
    for (auto [u, v] : es) internal += labels[u] == labels[v];
    return std::pair(internal, es.size() - internal);
  };
  AeiReport rep;
  std::tie(rep.m_int, rep.m_ext) = count(edges);
  rep.ei_obs = ei_index(rep.m_int, rep.m_ext);

  auto key = [](std::uint32_t u, std::uint32_t v) {
    return (static_cast<std::uint64_t>(std::min(u, v)) << 32) | std::max(u, v);
  };
  CounterRng rng(seed, 0xae1);
  std::vector<double> null;
  null.reserve(static_cast<std::size_t>(samples));
  for (int s = 0; s < samples; ++s) {
    auto es = edges;
    std::unordered_set<std::uint64_t> present;
    for (auto [u, v] : es) present.insert(key(u, v));
    const std::size_t attempts = 10 * es.size();
    for (std::size_t t = 0; t < attempts && es.size() >= 2; ++t) {
      const auto i = rng.below(es.size());
      const auto j = rng.below(es.size());
      if (i == j) continue;
      auto [a, b] = es[i];
      auto [c, d] = es[j];
      if (rng.bernoulli(0.5)) std::swap(c, d);
      // (a,b),(c,d) -> (a,d),(c,b)
      if (a == d || c == b) continue;
      if (present.contains(key(a, d)) || present.contains(key(c, b))) continue;
      present.erase(key(a, b));
      present.erase(key(c, d));
      present.insert(key(a, d));
      present.insert(key(c, b));
      es[i] = {std::min(a, d), std::max(a, d)};
      es[j] = {std::min(c, b), std::max(c, b)};
    }
    auto [mi, me] = count(es);
    null.push_back(ei_index(mi, me));
  }
  double mean = 0.0;
  for (double x : null) mean += x;
  mean /= static_cast<double>(null.size());
  double var = 0.0;
  for (double x : null) var += (x - mean) * (x - mean);
  rep.ei_null_mean = mean;
  rep.ei_null_sd = null.size() > 1 ? std::sqrt(var / static_cast<double>(null.size() - 1)) : 0.0;
  if (std::abs(rep.ei_null_mean + 1.0) < 1e-12) {
    throw NumericError("degenerate null: rewiring cannot create external edges");
  }
  rep.aei = (rep.ei_null_mean - rep.ei_obs) / (rep.ei_null_mean + 1.0);
  return rep;
}

}  // namespace detail

/// Segregation of communities a and b in one layer, relative to
/// degree-preserving rewiring of their induced subgraph:
///   aei = (ei_null_mean - ei_obs) / (ei_null_mean + 1),
/// ei = (m_ext - m_int) / (m_ext + m_int). 1 means full segregation, 0 means
/// the mixing expected at random. Symmetric in (a, b).
inline AeiReport aei(const Layer& layer, std::span<const Label> labels, Label a, Label b, int samples = 100,
                     std::uint64_t seed = 0) {
  if (a == b) throw DataError("AEI compares two distinct communities");
  std::vector<std::int64_t> local(layer.size(), -1);
  std::vector<Label> sub_labels;
  std::size_t na = 0, nb = 0;
  for (std::size_t p = 0; p < layer.size(); ++p) {
    if (labels[p] != a && labels[p] != b) continue;
    (labels[p] == a ? na : nb) += 1;
    local[p] = static_cast<std::int64_t>(sub_labels.size());
    // Relabel to 0/1 by the smaller label so swapping a and b is a no-op.
    sub_labels.push_back(labels[p] == std::min(a, b) ? 0 : 1);
  }
  if (na == 0 || nb == 0) {
    throw NumericError(fmt::format("layer '{}': community {} or {} is empty", layer.key(), a, b));
  }
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (const auto& e : layer.edges()) {
    if (local[e.a] >= 0 && local[e.b] >= 0) {
      edges.emplace_back(static_cast<std::uint32_t>(local[e.a]), static_cast<std::uint32_t>(local[e.b]));
    }
  }
  if (edges.empty()) {
    throw NumericError(fmt::format("layer '{}': communities {} and {} induce no edges", layer.key(), a, b));
  }
  auto rep = detail::external_internal(std::move(edges), sub_labels, samples, seed);
  rep.layer_key = layer.key();
  rep.community_a = std::min(a, b);
  rep.community_b = std::max(a, b);
  return rep;
}

/// Pooled variant over all communities of a layer (community ids -1, -1).
inline AeiReport aei_pooled(const Layer& layer, std::span<const Label> labels, int samples = 100,
                            std::uint64_t seed = 0) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (const auto& e : layer.edges()) edges.emplace_back(e.a, e.b);
  auto rep = detail::external_internal(std::move(edges), std::vector<Label>(labels.begin(), labels.end()), samples,
                                       seed);
  rep.layer_key = layer.key();
  rep.community_a = rep.community_b = -1;
  return rep;
}

// ---------------------------------------------------------------------------
// Layer similarity
// ---------------------------------------------------------------------------

struct LayerSimilarity {
  LayerIndex first = 0;
  LayerIndex second = 0;
  std::size_t shared = 0;
  std::optional<double> jaccard;
  std::optional<double> kendall;
};

/// Kendall tau-b; nullopt when either sequence is constant.
inline std::optional<double> kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  std::int64_t concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0.0 && dy == 0.0) continue;
      if (dx == 0.0) {
        ++ties_x;
      } else if (dy == 0.0) {
        ++ties_y;
      } else if ((dx > 0) == (dy > 0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const double n0 = static_cast<double>(concordant + discordant);
  const double denom = std::sqrt((n0 + static_cast<double>(ties_x)) * (n0 + static_cast<double>(ties_y)));
  if (denom == 0.0) return std::nullopt;
  return static_cast<double>(concordant - discordant) / denom;
}

/// Jaccard similarity of edge sets and Kendall tau-b of degree sequences over
/// the shared participants of every layer pair.
inline std::vector<LayerSimilarity> layer_similarity(const MultilayerNetwork& net) {
  if (net.layer_count() < 2) throw DataError("layer similarity needs at least two layers");
  std::vector<LayerSimilarity> out;
  for (LayerIndex s = 0; s < net.layer_count(); ++s) {
    for (LayerIndex r = s + 1; r < net.layer_count(); ++r) {
      LayerSimilarity sim{s, r, 0, std::nullopt, std::nullopt};
      const auto shared = net.shared_positions(s, r);
      sim.shared = shared.size();
      if (shared.empty()) {
        out.push_back(sim);
        continue;
      }
      const Layer& ls = net.layer(s);
      const Layer& lr = net.layer(r);
      std::unordered_set<std::uint64_t> in_shared;
      for (auto [ps, pr] : shared) in_shared.insert(ls.vertex(ps));
      auto edge_keys = [&](const Layer& layer) {
        std::vector<std::uint64_t> keys;
        for (const auto& e : layer.edges()) {
          const auto u = layer.vertex(e.a);
          const auto v = layer.vertex(e.b);
          if (in_shared.contains(u) && in_shared.contains(v)) keys.push_back((std::uint64_t{u} << 32) | v);
        }
        std::sort(keys.begin(), keys.end());
        return keys;
      };
      const auto es = edge_keys(ls);
      const auto er = edge_keys(lr);
      std::vector<std::uint64_t> common;
      std::set_intersection(es.begin(), es.end(), er.begin(), er.end(), std::back_inserter(common));
      const std::size_t uni = es.size() + er.size() - common.size();
      if (uni > 0) sim.jaccard = static_cast<double>(common.size()) / static_cast<double>(uni);
      const auto ds = ls.degrees();
      const auto dr = lr.degrees();
      std::vector<double> x, y;
      for (auto [ps, pr] : shared) {
        x.push_back(static_cast<double>(ds[ps]));
        y.push_back(static_cast<double>(dr[pr]));
      }
      sim.kendall = kendall_tau_b(x, y);
      out.push_back(sim);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Participation and power
// ---------------------------------------------------------------------------

struct ParticipationRow {
  LayerIndex layer = 0;
  std::size_t registry_size = 0;
  std::size_t participants = 0;
  /// Participants with degree >= 1.
  std::size_t active = 0;
  double rate = 0.0;
};

struct CoalitionShare {
  LayerIndex layer = 0;
  Label label = 0;
  /// Active members (degree >= 1 in the layer).
  std::size_t members = 0;
  double member_share = 0.0;
  std::optional<double> power_share;
};

struct ParticipationReport {
  std::vector<ParticipationRow> layers;
  std::vector<CoalitionShare> coalitions;
};

/// Participation rate per layer (active participants over registry size) and
/// member and power shares per coalition. Coalition members are the active
/// participants, so a layer's member shares sum to its participation rate.
/// Power shares are missing when the registry holds no power.
inline ParticipationReport participation_and_power(const MultilayerNetwork& net, const MultilayerPartition& part) {
  check_domain(net, part);
  const auto& reg = net.registry();
  const double n = static_cast<double>(reg.size());
  const double total_power = reg.total_power();
  ParticipationReport rep;
  for (LayerIndex l = 0; l < net.layer_count(); ++l) {
    const Layer& layer = net.layer(l);
    const auto deg = layer.degrees();
    ParticipationRow row{l, reg.size(), layer.size(), 0, 0.0};
    std::map<Label, std::pair<std::size_t, double>> members;
    for (std::size_t p = 0; p < layer.size(); ++p) {
      if (deg[p] == 0) continue;
      ++row.active;
      auto& m = members[part.labels[l][p]];
      ++m.first;
      m.second += reg[layer.vertex(static_cast<std::uint32_t>(p))].power;
    }
    row.rate = n > 0 ? static_cast<double>(row.active) / n : 0.0;
    rep.layers.push_back(row);
    for (const auto& [label, m] : members) {
      CoalitionShare share{l, label, m.first, static_cast<double>(m.first) / n, std::nullopt};
      if (total_power > 0.0) share.power_share = m.second / total_power;
      rep.coalitions.push_back(share);
    }
  }
  return rep;
}

}  // namespace coalmux
