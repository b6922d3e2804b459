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
#include <cstddef>
#include <map>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "coalmux/error.hpp"
#include "coalmux/netmodel.hpp"

// Scoring of multilayer partitions.
//
// Two functions live here. The multilayer modularity Q is what the maximizer
// climbs; the profile log-likelihood P(g) under the multilayer
// degree-corrected planted partition model is what model selection compares.
// P(g) is reported as a likelihood ratio against the undifferentiated model
// (one edge rate per layer, independent labels across layers), so every term
// is non-negative and an uncoupled network scores exactly zero across layers.
//
// Logarithms are natural throughout.

namespace coalmux {

inline constexpr double kCopyClamp = 1e-3;
inline constexpr double kThetaFloor = 1e-12;

/// Sufficient statistics of one layer under a partition. Weights act as
/// multiplicities.
struct LayerSufficientStats {
  double m = 0.0;
  double m_in = 0.0;
  double e_in = 0.0;
  double theta_in = 0.0;
  double theta_out = 0.0;
  /// Empty layer, or no between-community mass to estimate theta_out from.
  bool degenerate = false;
  /// theta_in < theta_out. The assortative model then fits no better than
  /// the single-rate model and the layer scores 0.
  bool disassortative = false;

  bool operator==(const LayerSufficientStats&) const = default;
};

struct PairStats {
  std::size_t n_shared = 0;
  std::size_t n_same = 0;
  int k_pair = 2;
  double p_hat = 0.0;

  bool operator==(const PairStats&) const = default;
};

struct ScoreBreakdown {
  std::vector<double> intra;
  std::map<LayerPair, double> inter;
  double total = 0.0;
  std::vector<LayerSufficientStats> layer_stats;
  std::map<LayerPair, PairStats> pair_stats;

  double intra_sum() const {
    double s = 0.0;
    for (double v : intra) s += v;
    return s;
  }
  double inter_sum() const {
    double s = 0.0;
    for (const auto& [pair, v] : inter) s += v;
    return s;
  }
};

namespace detail {

inline double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }

/// Per-label total strength of one layer.
inline std::unordered_map<Label, double> label_strength(const Layer& layer, std::span<const Label> labels) {
  std::unordered_map<Label, double> kappa;
  auto s = layer.strength();
  for (std::size_t p = 0; p < labels.size(); ++p) kappa[labels[p]] += s[p];
  return kappa;
}

inline double within_weight(const Layer& layer, std::span<const Label> labels) {
  double w = 0.0;
  for (const auto& e : layer.edges()) {
    if (labels[e.a] == labels[e.b]) w += e.weight;
  }
  return w;
}

}  // namespace detail

/// Unnormalized multilayer modularity:
///   sum_s beta_s sum_{i<j} [A_ij - gamma_s d_i d_j / (2 m_s)] [g_i = g_j]
///   + sum_{(s,r) coupled} omega_sr sum_{i shared} [g_i^s = g_i^r].
inline double multilayer_modularity(const MultilayerNetwork& net, const ModelParams& params,
                                    const MultilayerPartition& part) {
  check_domain(net, part);
  double q = 0.0;
  for (LayerIndex l = 0; l < net.layer_count(); ++l) {
    const Layer& layer = net.layer(l);
    const double m = layer.total_weight();
    if (m <= 0.0) continue;
    const auto& labels = part.labels[l];
    std::unordered_map<Label, double> kappa;
    std::unordered_map<Label, double> kappa_sq;
    auto s = layer.strength();
    for (std::size_t p = 0; p < labels.size(); ++p) {
      kappa[labels[p]] += s[p];
      kappa_sq[labels[p]] += s[p] * s[p];
    }
    double pair_mass = 0.0;
    for (const auto& [g, k] : kappa) pair_mass += (k * k - kappa_sq[g]) / 2.0;
    q += params.beta[l] * (detail::within_weight(layer, labels) - params.gamma[l] * pair_mass / (2.0 * m));
  }
  for (auto pair : net.couplings()) {
    const double w = params.omega_for(pair);
    if (w == 0.0) continue;
    std::size_t same = 0;
    for (auto [ps, pr] : net.shared_positions(pair.first, pair.second)) {
      if (part.labels[pair.first][ps] == part.labels[pair.second][pr]) ++same;
    }
    q += w * static_cast<double>(same);
  }
  return q;
}

/// Profile log-likelihood ratio of one layer against the single-rate model,
/// with the planted partition constrained to theta_in >= theta_out:
///   m_in ln(m_in / E_in) + (m - m_in) ln((m - m_in) / (m - E_in)),
/// E_in = sum_c kappa_c^2 / (4m), and 0 when the fit is disassortative.
inline std::pair<double, LayerSufficientStats> intra_loglik(const Layer& layer, std::span<const Label> labels) {
  LayerSufficientStats st;
  st.m = layer.total_weight();
  if (st.m <= 0.0) {
    st.degenerate = true;
    return {0.0, st};
  }
  st.m_in = detail::within_weight(layer, labels);
  for (const auto& [g, k] : detail::label_strength(layer, labels)) st.e_in += k * k;
  st.e_in /= 4.0 * st.m;

  const double m_out = st.m - st.m_in;
  double e_out = st.m - st.e_in;
  if (e_out <= 1e-12 * st.m) {
    if (m_out > 1e-12 * st.m) {
      throw NumericError(fmt::format("layer '{}': expected between-community mass is zero but {} edges cross",
                                     layer.key(), m_out));
    }
    e_out = 0.0;
  }
  st.theta_in = st.m_in / st.e_in;
  if (e_out > 0.0) {
    st.theta_out = m_out / e_out;
  } else {
    st.theta_out = 0.0;
    st.degenerate = true;
  }
  if (e_out > 0.0 && st.theta_in < st.theta_out) {
    st.disassortative = true;
    return {0.0, st};
  }
  double loglik = detail::xlogy(st.m_in, st.theta_in);
  if (e_out > 0.0) loglik += detail::xlogy(m_out, st.theta_out);
  return {std::max(loglik, 0.0), st};
}

struct GammaEstimate {
  double value = 1.0;
  /// A theta was clamped to kThetaFloor, or the layer was degenerate.
  bool flagged = false;
};

/// Resolution matching the planted partition rates:
/// (theta_in - theta_out) / (ln theta_in - ln theta_out).
inline GammaEstimate gamma_hat(double theta_in, double theta_out) {
  GammaEstimate est;
  if (std::abs(theta_in - theta_out) < 1e-9) {
    est.value = theta_in;
    est.flagged = !(theta_in > 0.0);
    if (est.flagged) est.value = kThetaFloor;
    return est;
  }
  if (theta_in < kThetaFloor) {
    theta_in = kThetaFloor;
    est.flagged = true;
  }
  if (theta_out < kThetaFloor) {
    theta_out = kThetaFloor;
    est.flagged = true;
  }
  est.value = (theta_in - theta_out) / (std::log(theta_in) - std::log(theta_out));
  return est;
}

inline GammaEstimate gamma_hat(const LayerSufficientStats& st) {
  auto est = gamma_hat(st.theta_in, st.theta_out);
  est.flagged = est.flagged || st.degenerate;
  return est;
}

/// Coupling equivalent to copy probability p over k labels:
/// ln((1 - p + p k) / (1 - p)).
inline double omega_from_p(double p, int k) {
  const double kk = static_cast<double>(k);
  return std::log1p(p * (kk - 1.0)) - std::log1p(-p);
}

inline double p_from_omega(double omega, int k) {
  const double e = std::exp(omega);
  return (e - 1.0) / (e + static_cast<double>(k) - 1.0);
}

/// Copy-model log-likelihood ratio (against p = 0) of the labels shared by
/// one layer pair.
inline std::pair<double, PairStats> inter_loglik(const MultilayerNetwork& net, const MultilayerPartition& part,
                                                 LayerPair pair, int k_pair) {
  if (k_pair < 2) throw NumericError(fmt::format("copy prior needs at least 2 labels, got {}", k_pair));
  PairStats st;
  st.k_pair = k_pair;
  for (auto [ps, pr] : net.shared_positions(pair.first, pair.second)) {
    ++st.n_shared;
    if (part.labels[pair.first][ps] == part.labels[pair.second][pr]) ++st.n_same;
  }
  if (st.n_shared == 0) return {0.0, st};
  const double k = static_cast<double>(k_pair);
  const double f = static_cast<double>(st.n_same) / static_cast<double>(st.n_shared);
  st.p_hat = std::clamp((f * k - 1.0) / (k - 1.0), 0.0, 1.0 - kCopyClamp);
  const double same = static_cast<double>(st.n_same);
  const double diff = static_cast<double>(st.n_shared - st.n_same);
  const double loglik = same * std::log1p(st.p_hat * (k - 1.0)) + diff * std::log1p(-st.p_hat);
  return {std::max(loglik, 0.0), st};
}

/// Label universe for the copy prior of a pair: distinct labels used by
/// either layer, at least 2, capped by the tighter finite K_max.
inline int default_k_pair(const MultilayerPartition& part, LayerPair pair, std::span<const int> k_max = {}) {
  std::vector<Label> seen(part.labels[pair.first].begin(), part.labels[pair.first].end());
  seen.insert(seen.end(), part.labels[pair.second].begin(), part.labels[pair.second].end());
  std::sort(seen.begin(), seen.end());
  int k = static_cast<int>(std::unique(seen.begin(), seen.end()) - seen.begin());
  if (!k_max.empty()) {
    for (LayerIndex l : {pair.first, pair.second}) {
      if (k_max[l] > 0) k = std::min(k, k_max[l]);
    }
  }
  return std::max(k, 2);
}

/// P(g) = sum of layer terms + sum of coupled-pair terms. Terms are added in
/// layer order, then pair order.
inline ScoreBreakdown total_loglik(const MultilayerNetwork& net, const MultilayerPartition& part,
                                   std::span<const int> k_max = {}) {
  check_domain(net, part);
  ScoreBreakdown sb;
  sb.intra.reserve(net.layer_count());
  for (LayerIndex l = 0; l < net.layer_count(); ++l) {
    auto [value, st] = intra_loglik(net.layer(l), part.labels[l]);
    sb.intra.push_back(value);
    sb.layer_stats.push_back(st);
    sb.total += value;
  }
  for (auto pair : net.couplings()) {
    auto [value, st] = inter_loglik(net, part, pair, default_k_pair(part, pair, k_max));
    sb.inter[pair] = value;
    sb.pair_stats[pair] = st;
    sb.total += value;
  }
  return sb;
}

struct ParamUpdate {
  ModelParams params;
  /// Layers whose resolution fell back to 1.0.
  std::vector<LayerIndex> degenerate_layers;
};

/// Fixed-point step: resolution from the fitted planted partition rates,
/// coupling from the fitted copy probability. Layer weights are kept.
inline ParamUpdate update_params_from_partition(const MultilayerNetwork& net, const MultilayerPartition& part,
                                                const ModelParams& base) {
  ParamUpdate up{base, {}};
  const auto scores = total_loglik(net, part, base.k_max);
  for (LayerIndex l = 0; l < net.layer_count(); ++l) {
    auto est = gamma_hat(scores.layer_stats[l]);
    if (est.flagged) {
      up.params.gamma[l] = 1.0;
      up.degenerate_layers.push_back(l);
    } else {
      up.params.gamma[l] = est.value;
    }
  }
  up.params.omega.clear();
  for (const auto& [pair, st] : scores.pair_stats) up.params.omega[pair] = omega_from_p(st.p_hat, st.k_pair);
  return up;
}

}  // namespace coalmux
