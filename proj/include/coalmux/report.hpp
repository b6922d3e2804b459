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

#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "coalmux/error.hpp"
#include "coalmux/io.hpp"
#include "coalmux/metrics.hpp"
#include "coalmux/netmodel.hpp"
#include "coalmux/quality.hpp"
#include "coalmux/rng.hpp"

namespace coalmux::report {

/// Rounds to four decimals for display; -0 prints as 0.
inline std::string num(double x) {
  if (std::isnan(x)) return "NA";
  double r = std::round(x * 1e4) / 1e4;
  if (r == 0.0) r = 0.0;
  return fmt::format("{}", r);
}

inline std::string num(const std::optional<double>& x) { return x ? num(*x) : "NA"; }

/// "Δ=86, likelihood ratio e^86 ≈ 10^37" for totals 2681 and 2595.
inline std::string format_delta(double multilayer_total, double monolayer_total) {
  const double delta = multilayer_total - monolayer_total;
  const auto decimal = std::lround(delta / std::log(10.0));
  return fmt::format("Δ={}, likelihood ratio e^{} ≈ 10^{}", num(delta), num(delta), decimal);
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// CSV text with '#' preamble lines.
  std::string csv(const std::vector<std::string>& preamble = {}) const {
    std::string out;
    for (const auto& line : preamble) out += "# " + line + "\n";
    auto emit = [&](const std::vector<std::string>& fields) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += csv_field(fields[i]);
      }
      out += '\n';
    };
    emit(header);
    for (const auto& r : rows) emit(r);
    return out;
  }
};

/// One row per layer term, per pair term and the total.
inline Table score_table(const MultilayerNetwork& net, const ScoreBreakdown& sb) {
  Table t{{"term", "key", "value", "theta_in", "theta_out", "p_hat", "k_pair"}, {}};
  for (LayerIndex l = 0; l < net.layer_count(); ++l) {
    const auto& st = sb.layer_stats.size() > l ? sb.layer_stats[l] : LayerSufficientStats{};
    t.rows.push_back({"intra", net.layer(l).key(), num(sb.intra[l]), num(st.theta_in), num(st.theta_out), "", ""});
  }
  for (const auto& [pair, v] : sb.inter) {
    auto it = sb.pair_stats.find(pair);
    t.rows.push_back({"inter", net.pair_key(pair), num(v), "", "", it == sb.pair_stats.end() ? "" : num(it->second.p_hat),
                      it == sb.pair_stats.end() ? "" : fmt::format("{}", it->second.k_pair)});
  }
  t.rows.push_back({"total_intra", "", num(sb.intra_sum()), "", "", "", ""});
  t.rows.push_back({"total_inter", "", num(sb.inter_sum()), "", "", "", ""});
  t.rows.push_back({"total", "", num(sb.total), "", "", "", ""});
  return t;
}

inline Table participation_table(const MultilayerNetwork& net, const ParticipationReport& rep) {
  Table t{{"layer", "registry_size", "participants", "active", "participation_pct"}, {}};
  for (const auto& r : rep.layers) {
    t.rows.push_back({net.layer(r.layer).key(), fmt::format("{}", r.registry_size), fmt::format("{}", r.participants),
                      fmt::format("{}", r.active), num(100.0 * r.rate)});
  }
  return t;
}

inline Table coalition_table(const MultilayerNetwork& net, const ParticipationReport& rep) {
  Table t{{"layer", "coalition", "members", "member_share_pct", "power_share_pct"}, {}};
  for (const auto& c : rep.coalitions) {
    t.rows.push_back({net.layer(c.layer).key(), fmt::format("{}", c.label), fmt::format("{}", c.members),
                      num(100.0 * c.member_share), c.power_share ? num(100.0 * *c.power_share) : "NA"});
  }
  return t;
}

/// Layer-by-layer comparison of partition `a` (rows) with partition `b`
/// (columns) over shared vertices. Long form with both RMI variants.
inline Table rmi_pairs(const MultilayerNetwork& net, const MultilayerPartition& a, const MultilayerPartition& b) {
  Table t{{"layer_a", "layer_b", "shared", "mutual_information", "rmi", "rmi_normalized", "approximate"}, {}};
  for (LayerIndex s = 0; s < net.layer_count(); ++s) {
    for (LayerIndex r = 0; r < net.layer_count(); ++r) {
      std::vector<Label> x, y;
      for (auto [ps, pr] : net.shared_positions(s, r)) {
        x.push_back(a.labels[s][ps]);
        y.push_back(b.labels[r][pr]);
      }
      if (x.empty()) {
        t.rows.push_back({net.layer(s).key(), net.layer(r).key(), "0", "NA", "NA", "NA", "false"});
        continue;
      }
      const auto plain = rmi(x, y);
      const auto norm = rmi(x, y, true);
      t.rows.push_back({net.layer(s).key(), net.layer(r).key(), fmt::format("{}", x.size()),
                        num(plain.mutual_information), num(plain.value), num(norm.value),
                        norm.approximate ? "true" : "false"});
    }
  }
  return t;
}

/// Square grid of normalized RMI values taken from rmi_pairs output.
inline Table rmi_matrix(const MultilayerNetwork& net, const Table& pairs) {
  Table t{{"layer"}, {}};
  for (const auto& layer : net.layers()) t.header.push_back(layer.key());
  const std::size_t n = net.layer_count();
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<std::string> row{net.layer(static_cast<LayerIndex>(s)).key()};
    for (std::size_t r = 0; r < n; ++r) row.push_back(pairs.rows[s * n + r][5]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

/// AEI for every pair of coalitions present in each layer, plus the pooled
/// value per layer. Degenerate cases are reported in the status column.
inline Table aei_table(const MultilayerNetwork& net, const MultilayerPartition& part, int samples,
                       std::uint64_t seed) {
  Table t{{"layer", "coalition_a", "coalition_b", "m_int", "m_ext", "ei_obs", "ei_null_mean", "ei_null_sd", "aei",
           "status"},
          {}};
  auto row = [](const std::string& key, const std::string& a, const std::string& b, const AeiReport& r) {
    return std::vector<std::string>{key,
                                    a,
                                    b,
                                    fmt::format("{}", r.m_int),
                                    fmt::format("{}", r.m_ext),
                                    num(r.ei_obs),
                                    num(r.ei_null_mean),
                                    num(r.ei_null_sd),
                                    num(r.aei),
                                    "ok"};
  };
  for (LayerIndex l = 0; l < net.layer_count(); ++l) {
    const auto& layer = net.layer(l);
    const auto& labels = part.labels[l];
    const std::set<Label> present(labels.begin(), labels.end());
    const std::vector<Label> ids(present.begin(), present.end());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t j = i + 1; j < ids.size(); ++j) {
        const auto pair_seed = hash_combine(hash_combine(seed, l), hash_combine(static_cast<std::uint64_t>(ids[i]),
                                                                                static_cast<std::uint64_t>(ids[j])));
        const auto a = fmt::format("{}", ids[i]);
        const auto b = fmt::format("{}", ids[j]);
        try {
          t.rows.push_back(row(layer.key(), a, b, aei(layer, labels, ids[i], ids[j], samples, pair_seed)));
        } catch (const NumericError& e) {
          t.rows.push_back({layer.key(), a, b, "", "", "NA", "NA", "NA", "NA", fmt::format("degenerate: {}", e.what())});
        }
      }
    }
    try {
      t.rows.push_back(row(layer.key(), "all", "all", aei_pooled(layer, labels, samples, hash_combine(seed, l))));
    } catch (const NumericError& e) {
      t.rows.push_back(
          {layer.key(), "all", "all", "", "", "NA", "NA", "NA", "NA", fmt::format("degenerate: {}", e.what())});
    }
  }
  return t;
}

/// Degree and coalition of every participant in every layer.
inline Table degree_table(const MultilayerNetwork& net, const MultilayerPartition& part) {
  Table t{{"vertex_id", "name", "layer", "degree", "strength", "coalition"}, {}};
  const auto& reg = net.registry();
  for (LayerIndex l = 0; l < net.layer_count(); ++l) {
    const auto& layer = net.layer(l);
    const auto deg = layer.degrees();
    const auto str = layer.strength();
    for (std::uint32_t p = 0; p < layer.size(); ++p) {
      const auto& v = reg[layer.vertex(p)];
      t.rows.push_back({v.id, v.name, layer.key(), fmt::format("{}", deg[p]), num(str[p]),
                        fmt::format("{}", part.labels[l][p])});
    }
  }
  return t;
}

inline Table similarity_table(const MultilayerNetwork& net) {
  Table t{{"layer_a", "layer_b", "shared", "jaccard", "kendall_tau_b"}, {}};
  if (net.layer_count() < 2) return t;
  for (const auto& s : layer_similarity(net)) {
    t.rows.push_back({net.layer(s.first).key(), net.layer(s.second).key(), fmt::format("{}", s.shared), num(s.jaccard),
                      num(s.kendall)});
  }
  return t;
}

}  // namespace coalmux::report
