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

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "coalmux/error.hpp"
#include "coalmux/netmodel.hpp"
#include "coalmux/quality.hpp"

#ifndef COALMUX_VERSION
#define COALMUX_VERSION "0.0.0"
#endif

namespace coalmux {

using Json = nlohmann::json;

inline constexpr std::string_view kVersion = COALMUX_VERSION;

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("{}: cannot open", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes through a sibling temporary file and renames it into place.
inline void write_text_atomic(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(fmt::format("{}: cannot write", path.string()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw DataError(fmt::format("{}: write failed", path.string()));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw DataError(fmt::format("{}: rename failed: {}", path.string(), ec.message()));
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

struct CsvTable {
  std::string source;
  std::vector<std::string> header;
  std::vector<CsvRow> rows;

  [[noreturn]] void fail(std::size_t line, const std::string& what) const {
    throw DataError(fmt::format("{}:{}: {}", source, line, what));
  }
};

/// Comma-separated records with optional double-quoted fields ("" escapes a
/// quote; quoted fields may span lines). Blank lines and lines starting with
/// '#' outside quotes are skipped. The first record is the header.
inline CsvTable parse_csv(std::string_view text, std::string source) {
  CsvTable table{std::move(source), {}, {}};
  std::size_t i = 0, line = 1;
  bool have_header = false;
  if (text.starts_with("\xEF\xBB\xBF")) i = 3;
  while (i < text.size()) {
    const std::size_t start_line = line;
    if (text[i] == '\n' || text[i] == '\r') {
      if (text[i] == '\n') ++line;
      ++i;
      continue;
    }
    if (text[i] == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    std::vector<std::string> fields(1);
    bool quoted = false, was_quoted = false;
    for (; i < text.size(); ++i) {
      const char c = text[i];
      if (quoted) {
        if (c == '"') {
          if (i + 1 < text.size() && text[i + 1] == '"') {
            fields.back() += '"';
            ++i;
          } else {
            quoted = false;
          }
        } else {
          if (c == '\n') ++line;
          fields.back() += c;
        }
        continue;
      }
      if (c == ',') {
        fields.emplace_back();
        was_quoted = false;
      } else if (c == '"') {
        if (!fields.back().empty() || was_quoted) table.fail(line, "stray quote inside field");
        quoted = was_quoted = true;
      } else if (c == '\r') {
        continue;
      } else if (c == '\n') {
        break;
      } else {
        if (was_quoted) table.fail(line, "text after closing quote");
        fields.back() += c;
      }
    }
    if (quoted) table.fail(start_line, "unterminated quoted field");
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
    } else {
      if (fields.size() != table.header.size()) {
        table.fail(start_line, fmt::format("expected {} fields, found {}", table.header.size(), fields.size()));
      }
      table.rows.push_back({start_line, std::move(fields)});
    }
  }
  if (!have_header) table.fail(1, "missing header");
  return table;
}

inline CsvTable read_csv(const std::filesystem::path& path, const std::vector<std::string>& expected_header) {
  auto table = parse_csv(read_text(path), path.string());
  if (table.header != expected_header) {
    std::string want;
    for (const auto& h : expected_header) want += (want.empty() ? "" : ",") + h;
    table.fail(1, fmt::format("header must be '{}'", want));
  }
  return table;
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos && !s.starts_with('#')) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string csv_line(std::initializer_list<std::string_view> fields) {
  std::string out;
  bool first = true;
  for (auto f : fields) {
    if (!first) out += ',';
    out += csv_field(f);
    first = false;
  }
  out += '\n';
  return out;
}

namespace detail {

inline double parse_real(const CsvTable& t, const CsvRow& row, std::size_t col) {
  const auto& s = row.fields[col];
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    t.fail(row.line, fmt::format("{} '{}' is not a number", t.header[col], s));
  }
  return x;
}

inline long long parse_integer(const CsvTable& t, const CsvRow& row, std::size_t col) {
  const auto& s = row.fields[col];
  long long x = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    t.fail(row.line, fmt::format("{} '{}' is not an integer", t.header[col], s));
  }
  return x;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Network files
// ---------------------------------------------------------------------------

struct NetworkFiles {
  std::filesystem::path vertices;
  std::filesystem::path layers;
  std::filesystem::path edges;
  std::optional<std::filesystem::path> participation;
  /// Explicit coupling list (header layer_a,layer_b); overrides `topology`.
  std::optional<std::filesystem::path> couplings;

  /// Standard file names inside `dir`; optional files are used when present.
  static NetworkFiles in(const std::filesystem::path& dir) {
    NetworkFiles f{dir / "vertices.csv", dir / "layers.csv", dir / "edges.csv", std::nullopt, std::nullopt};
    if (std::filesystem::exists(dir / "participation.csv")) f.participation = dir / "participation.csv";
    if (std::filesystem::exists(dir / "couplings.csv")) f.couplings = dir / "couplings.csv";
    return f;
  }
};

/// Reads and validates a network. Without a participation file a vertex
/// participates in a layer iff it has an edge there; listed participants are
/// added to the edge endpoints, which is how isolates enter.
inline MultilayerNetwork load_network(const NetworkFiles& files,
                                      CouplingTopology topology = CouplingTopology::kAllPairs) {
  VertexRegistry reg;
  {
    const auto t = read_csv(files.vertices, {"id", "name", "actor_type", "power"});
    for (const auto& row : t.rows) {
      const double power = detail::parse_real(t, row, 3);
      try {
        reg.add({row.fields[0], row.fields[1], row.fields[2], power});
      } catch (const DataError& e) {
        t.fail(row.line, e.what());
      }
    }
  }

  struct Pending {
    std::string key;
    LayerId id;
    std::set<VertexIndex> participants;
    std::vector<std::tuple<VertexIndex, VertexIndex, double>> edges;
    std::set<std::pair<VertexIndex, VertexIndex>> seen;
  };
  std::vector<Pending> pending;
  std::unordered_map<std::string, std::size_t> layer_index;
  {
    const auto t = read_csv(files.layers, {"layer_id", "mode", "time"});
    std::set<std::pair<std::string, long long>> ids;
    for (const auto& row : t.rows) {
      const auto& key = row.fields[0];
      if (key.empty()) t.fail(row.line, "empty layer_id");
      const auto time = detail::parse_integer(t, row, 2);
      if (!layer_index.emplace(key, pending.size()).second) t.fail(row.line, fmt::format("duplicate layer '{}'", key));
      if (!ids.emplace(row.fields[1], time).second) {
        t.fail(row.line, fmt::format("duplicate (mode, time) ({}, {})", row.fields[1], time));
      }
      pending.push_back({key, LayerId{row.fields[1], static_cast<int>(time)}, {}, {}, {}});
    }
  }
  auto layer_of = [&](const CsvTable& t, const CsvRow& row) -> Pending& {
    auto it = layer_index.find(row.fields[0]);
    if (it == layer_index.end()) t.fail(row.line, fmt::format("unknown layer '{}'", row.fields[0]));
    return pending[it->second];
  };
  auto vertex_of = [&](const CsvTable& t, const CsvRow& row, std::size_t col) {
    auto v = reg.find(row.fields[col]);
    if (!v) t.fail(row.line, fmt::format("unknown vertex '{}'", row.fields[col]));
    return *v;
  };
  {
    const auto t = read_csv(files.edges, {"layer_id", "source", "target", "weight"});
    for (const auto& row : t.rows) {
      auto& layer = layer_of(t, row);
      const auto u = vertex_of(t, row, 1);
      const auto v = vertex_of(t, row, 2);
      const double w = detail::parse_real(t, row, 3);
      if (u == v) t.fail(row.line, fmt::format("self-loop on '{}'", row.fields[1]));
      if (!(w > 0.0)) t.fail(row.line, fmt::format("weight must be > 0, got {}", row.fields[3]));
      if (!layer.seen.emplace(std::min(u, v), std::max(u, v)).second) {
        t.fail(row.line, fmt::format("duplicate edge {}-{}", row.fields[1], row.fields[2]));
      }
      layer.edges.emplace_back(u, v, w);
      layer.participants.insert(u);
      layer.participants.insert(v);
    }
  }
  if (files.participation) {
    const auto t = read_csv(*files.participation, {"layer_id", "vertex_id"});
    for (const auto& row : t.rows) layer_of(t, row).participants.insert(vertex_of(t, row, 1));
  }
  std::vector<Layer> layers;
  for (auto& p : pending) {
    layers.push_back(Layer::make(p.key, p.id, {p.participants.begin(), p.participants.end()}, p.edges));
  }
  MultilayerNetwork net(std::move(reg), std::move(layers));
  if (files.couplings) {
    const auto t = read_csv(*files.couplings, {"layer_a", "layer_b"});
    std::vector<LayerPair> pairs;
    for (const auto& row : t.rows) {
      auto a = net.find_layer(row.fields[0]);
      auto b = net.find_layer(row.fields[1]);
      if (!a || !b) t.fail(row.line, "coupling references an unknown layer");
      if (*a == *b) t.fail(row.line, "a layer cannot be coupled to itself");
      pairs.push_back(LayerPair::of(*a, *b));
    }
    return net.with_couplings(std::move(pairs));
  }
  if (topology != CouplingTopology::kAllPairs) return net.with_couplings(net.topology_pairs(topology));
  return net;
}

inline MultilayerNetwork load_network(const std::filesystem::path& dir,
                                      CouplingTopology topology = CouplingTopology::kAllPairs) {
  return load_network(NetworkFiles::in(dir), topology);
}

/// Writes the standard file set, including every participant and the
/// coupling list, so loading the directory reproduces the network exactly.
/// `preamble` lines are emitted as '#' comments at the top of each file.
inline void save_network(const MultilayerNetwork& net, const std::filesystem::path& dir,
                         const std::vector<std::string>& preamble = {}) {
  std::string head;
  for (const auto& line : preamble) head += "# " + line + "\n";
  const auto& reg = net.registry();
  std::string vertices = head + "id,name,actor_type,power\n";
  for (const auto& v : reg.entries()) vertices += csv_line({v.id, v.name, v.actor_type, fmt::format("{}", v.power)});
  std::string layers = head + "layer_id,mode,time\n";
  std::string edges = head + "layer_id,source,target,weight\n";
  std::string part = head + "layer_id,vertex_id\n";
  for (const auto& layer : net.layers()) {
    layers += csv_line({layer.key(), layer.id().mode, fmt::format("{}", layer.id().time)});
    for (const auto& e : layer.edges()) {
      edges += csv_line({layer.key(), reg[layer.vertex(e.a)].id, reg[layer.vertex(e.b)].id, fmt::format("{}", e.weight)});
    }
    for (auto v : layer.participants()) part += csv_line({layer.key(), reg[v].id});
  }
  std::string couplings = head + "layer_a,layer_b\n";
  for (auto p : net.couplings()) couplings += csv_line({net.layer(p.first).key(), net.layer(p.second).key()});
  write_text_atomic(dir / "vertices.csv", vertices);
  write_text_atomic(dir / "layers.csv", layers);
  write_text_atomic(dir / "edges.csv", edges);
  write_text_atomic(dir / "participation.csv", part);
  write_text_atomic(dir / "couplings.csv", couplings);
}

// ---------------------------------------------------------------------------
// partition.json
// ---------------------------------------------------------------------------

inline constexpr int kPartitionVersion = 1;

/// Name-keyed form of a partition with its parameters and scores. Layer pairs
/// are keyed "A|B"; a null k_max means unbounded.
struct PartitionDocument {
  std::map<std::string, std::map<std::string, Label>> assignments;
  std::map<std::string, double> gamma;
  std::map<std::string, double> omega;
  std::map<std::string, double> beta;
  std::map<std::string, std::optional<int>> k_max;
  std::map<std::string, double> intra;
  std::map<std::string, double> inter;
  double total = 0.0;
  Json metadata = Json::object();

  bool operator==(const PartitionDocument&) const = default;
};

inline PartitionDocument make_document(const MultilayerNetwork& net, const MultilayerPartition& part,
                                       const ModelParams& params, const ScoreBreakdown& scores,
                                       Json metadata = Json::object()) {
  check_domain(net, part);
  params.validate(net);
  PartitionDocument doc;
  const auto& reg = net.registry();
  for (LayerIndex l = 0; l < net.layer_count(); ++l) {
    const auto& layer = net.layer(l);
    auto& a = doc.assignments[layer.key()];
    for (std::uint32_t p = 0; p < layer.size(); ++p) a[reg[layer.vertex(p)].id] = part.labels[l][p];
    doc.gamma[layer.key()] = params.gamma[l];
    doc.beta[layer.key()] = params.beta[l];
    doc.k_max[layer.key()] = params.k_max[l] > 0 ? std::optional<int>(params.k_max[l]) : std::nullopt;
    if (l < scores.intra.size()) doc.intra[layer.key()] = scores.intra[l];
  }
  for (const auto& [pair, w] : params.omega) doc.omega[net.pair_key(pair)] = w;
  for (const auto& [pair, v] : scores.inter) doc.inter[net.pair_key(pair)] = v;
  doc.total = scores.total;
  doc.metadata = std::move(metadata);
  return doc;
}

inline Json to_json(const PartitionDocument& doc) {
  Json k_max = Json::object();
  for (const auto& [key, k] : doc.k_max) k_max[key] = k ? Json(*k) : Json(nullptr);
  return Json{{"version", kPartitionVersion},
              {"metadata", doc.metadata},
              {"assignments", doc.assignments},
              {"params", {{"gamma", doc.gamma}, {"omega", doc.omega}, {"beta", doc.beta}, {"k_max", k_max}}},
              {"scores", {{"intra", doc.intra}, {"inter", doc.inter}, {"total", doc.total}}}};
}

inline PartitionDocument document_from_json(const Json& j, const std::string& source = "partition.json") {
  auto fail = [&](const std::string& what) -> void { throw DataError(fmt::format("{}: {}", source, what)); };
  if (!j.is_object() || !j.contains("version")) fail("missing version");
  if (!j["version"].is_number_integer() || j["version"].get<int>() != kPartitionVersion) {
    fail(fmt::format("unsupported version {} (expected {})", j["version"].dump(), kPartitionVersion));
  }
  PartitionDocument doc;
  try {
    doc.assignments = j.at("assignments").get<decltype(doc.assignments)>();
    const auto& p = j.at("params");
    doc.gamma = p.at("gamma").get<decltype(doc.gamma)>();
    doc.omega = p.at("omega").get<decltype(doc.omega)>();
    doc.beta = p.at("beta").get<decltype(doc.beta)>();
    for (const auto& [key, k] : p.at("k_max").items()) {
      if (k.is_null()) {
        doc.k_max[key] = std::nullopt;
      } else if (k.is_number_integer() && k.get<int>() > 0) {
        doc.k_max[key] = k.get<int>();
      } else {
        fail(fmt::format("k_max for '{}' must be a positive integer or null", key));
      }
    }
    const auto& s = j.at("scores");
    doc.intra = s.at("intra").get<decltype(doc.intra)>();
    doc.inter = s.at("inter").get<decltype(doc.inter)>();
    doc.total = s.at("total").get<double>();
    if (j.contains("metadata")) doc.metadata = j["metadata"];
  } catch (const Json::exception& e) {
    fail(fmt::format("schema violation: {}", e.what()));
  }
  return doc;
}

inline std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

inline void save_partition(const PartitionDocument& doc, const std::filesystem::path& path) {
  write_text_atomic(path, dump_json(to_json(doc)));
}

inline PartitionDocument load_partition(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(read_text(path));
  } catch (const Json::parse_error& e) {
    throw DataError(fmt::format("{}: {}", path.string(), e.what()));
  }
  return document_from_json(j, path.string());
}

struct BoundPartition {
  MultilayerPartition partition;
  ModelParams params;
};

/// Resolves a document against a network: every participant needs a label
/// and nothing else may be labelled. Missing parameters default to gamma 1,
/// beta 1, unbounded k_max and omega 0 on the network's couplings.
inline BoundPartition bind(const PartitionDocument& doc, const MultilayerNetwork& net) {
  BoundPartition out;
  out.params = ModelParams::uniform(net, 1.0, 0.0);
  const auto& reg = net.registry();
  for (const auto& [key, labels] : doc.assignments) {
    if (!net.find_layer(key)) throw DataError(fmt::format("partition names unknown layer '{}'", key));
  }
  for (LayerIndex l = 0; l < net.layer_count(); ++l) {
    const auto& layer = net.layer(l);
    auto it = doc.assignments.find(layer.key());
    if (it == doc.assignments.end()) throw DataError(fmt::format("partition lacks layer '{}'", layer.key()));
    if (it->second.size() != layer.size()) {
      throw DataError(fmt::format("partition labels {} vertices in layer '{}', which has {} participants",
                                  it->second.size(), layer.key(), layer.size()));
    }
    std::vector<Label> labels;
    for (std::uint32_t p = 0; p < layer.size(); ++p) {
      auto v = it->second.find(reg[layer.vertex(p)].id);
      if (v == it->second.end()) {
        throw DataError(fmt::format("partition lacks '{}' in layer '{}'", reg[layer.vertex(p)].id, layer.key()));
      }
      labels.push_back(v->second);
    }
    out.partition.labels.push_back(std::move(labels));
    if (auto g = doc.gamma.find(layer.key()); g != doc.gamma.end()) out.params.gamma[l] = g->second;
    if (auto b = doc.beta.find(layer.key()); b != doc.beta.end()) out.params.beta[l] = b->second;
    if (auto k = doc.k_max.find(layer.key()); k != doc.k_max.end()) out.params.k_max[l] = k->second.value_or(0);
  }
  std::map<std::string, LayerPair> pairs;
  for (auto pair : net.couplings()) pairs.emplace(net.pair_key(pair), pair);
  for (const auto& [key, w] : doc.omega) {
    auto it = pairs.find(key);
    if (it == pairs.end()) throw DataError(fmt::format("omega names uncoupled layer pair '{}'", key));
    out.params.omega[it->second] = w;
  }
  out.params.validate(net);
  return out;
}

}  // namespace coalmux
