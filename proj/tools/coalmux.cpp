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

// coalmux: multilayer coalition analysis from the command line.
//
//   coalmux synth    --preset case --seed 1 --out net/
//   coalmux backbone --in raw/ --alpha 0.05 --out net/
//   coalmux select   --in net/ --kmax 3 --seed 1 --out fit/
//   coalmux metrics  --in net/ --partition fit/partition.json --out metrics/
//   coalmux report   --in net/ --partition fit/partition.json --baseline fit/baseline.json --out report/
//
// Exit codes: 0 ok, 2 usage, 3 data error, 4 numeric degeneracy.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "coalmux/backbone.hpp"
#include "coalmux/error.hpp"
#include "coalmux/io.hpp"
#include "coalmux/metrics.hpp"
#include "coalmux/pipeline.hpp"
#include "coalmux/quality.hpp"
#include "coalmux/report.hpp"
#include "coalmux/synth.hpp"

namespace fs = std::filesystem;
using namespace coalmux;

namespace {

constexpr int kDefaultAeiSamples = 100;

struct Options {
  std::string in;
  std::string out;
  std::uint64_t seed = 0;
  std::string coupling;  // empty: couplings.csv when present, else all-pairs
  std::string mode = "multilayer";
  int runs = 10;
  int k_max = 0;
  double gamma = 1.0;
  double omega = 0.5;
  std::vector<double> gamma_grid{0.6, 0.8, 1.0, 1.2, 1.4};
  std::vector<double> omega_grid{0.0, 0.25, 0.5, 1.0, 2.0};
  double step_gamma = 0.05;
  double step_omega = 0.05;
  int max_passes = 50;
  bool baseline = true;
  double alpha = 0.05;
  bool keep_all = false;
  std::string preset = "case";
  std::string spec_file;
  std::string partition;
  std::string compare;
  std::string baseline_file;
  int samples = kDefaultAeiSamples;
};

std::string digest_hex(std::uint64_t h) { return fmt::format("{:016x}", h); }

/// Content digest of the network files in `dir`; paths do not enter it.
std::string network_digest(const fs::path& dir) {
  std::uint64_t h = 0;
  for (const char* name : {"vertices.csv", "layers.csv", "edges.csv", "participation.csv", "couplings.csv"}) {
    const auto p = dir / name;
    h = hash_combine(h, fs::exists(p) ? hash_string(read_text(p)) : 0);
  }
  return digest_hex(h);
}

Json metadata(const std::string& command, Json config, std::uint64_t seed, Json inputs = Json::object()) {
  return Json{{"tool", "coalmux"},
              {"version", std::string(kVersion)},
              {"command", command},
              {"config", std::move(config)},
              {"seeds", {{"base_seed", seed}}},
              {"inputs", std::move(inputs)},
              {"conventions",
               {{"modularity", "unnormalized, summed over i<j"},
                {"loglik", "profile likelihood ratio vs. undifferentiated and independent-label nulls, nats"},
                {"aei", "(ei_null_mean - ei_obs) / (ei_null_mean + 1), null = degree-preserving rewiring"},
                {"backbone_null", kBackboneNull}}}};
}

std::vector<std::string> preamble(const Json& meta) {
  return {fmt::format("coalmux {} {}", meta["version"].get<std::string>(), meta["command"].get<std::string>()),
          "metadata: " + meta.dump()};
}

void write_table(const fs::path& dir, const std::string& name, const report::Table& t, const Json& meta) {
  write_text_atomic(dir / name, t.csv(preamble(meta)));
}

MultilayerNetwork load_input(const Options& o) {
  if (o.in.empty()) throw UsageError("--in is required");
  auto files = NetworkFiles::in(o.in);
  CouplingTopology topology = CouplingTopology::kAllPairs;
  if (!o.coupling.empty()) {
    files.couplings.reset();
    if (o.coupling == "all-pairs") {
      topology = CouplingTopology::kAllPairs;
    } else if (o.coupling == "temporal") {
      topology = CouplingTopology::kTemporal;
    } else if (o.coupling.starts_with("custom:")) {
      files.couplings = o.coupling.substr(7);
    } else {
      throw UsageError(fmt::format("--coupling must be all-pairs, temporal or custom:<file>, got '{}'", o.coupling));
    }
  }
  return load_network(files, topology);
}

Json input_record(const Options& o) {
  Json j{{"network", network_digest(o.in)}};
  if (o.coupling.starts_with("custom:")) j["couplings"] = digest_hex(hash_string(read_text(o.coupling.substr(7))));
  return j;
}

SelectionConfig selection_config(const Options& o) {
  SelectionConfig c;
  c.gamma_grid = o.gamma_grid;
  c.omega_grid = o.omega_grid;
  c.step_gamma = o.step_gamma;
  c.step_omega = o.step_omega;
  c.runs = o.runs;
  c.max_passes = o.max_passes;
  c.base_seed = o.seed;
  c.k_max = o.k_max;
  c.mode = parse_mode(o.mode);
  c.validate();
  return c;
}

Json selection_json(const SelectionConfig& c, const std::string& coupling) {
  return Json{{"mode", std::string(to_string(c.mode))},
              {"coupling", coupling.empty() ? "auto" : coupling},
              {"gamma_grid", c.gamma_grid},
              {"omega_grid", c.omega_grid},
              {"step_gamma", c.step_gamma},
              {"step_omega", c.step_omega},
              {"runs", c.runs},
              {"max_passes", c.max_passes},
              {"consensus_iterations", c.consensus_iterations},
              {"k_max", c.k_max == 0 ? Json(nullptr) : Json(c.k_max)}};
}

Json params_json(const MultilayerNetwork& net, const ModelParams& p) {
  Json gamma = Json::object(), omega = Json::object();
  for (LayerIndex l = 0; l < net.layer_count(); ++l) gamma[net.layer(l).key()] = p.gamma[l];
  for (const auto& [pair, w] : p.omega) omega[net.pair_key(pair)] = w;
  return Json{{"gamma", gamma}, {"omega", omega}};
}

/// Network the document was scored on: monolayer documents drop couplings.
bool is_monolayer(const PartitionDocument& doc) {
  return doc.metadata.contains("config") && doc.metadata["config"].value("mode", "multilayer") == "monolayer";
}

/// Recomputes P(g) for a bound document. Monolayer documents are scored
/// without couplings and list every coupled pair with a zero inter term.
ScoreBreakdown score_document(const MultilayerNetwork& net, const PartitionDocument& doc, const BoundPartition& b) {
  if (!is_monolayer(doc)) return total_loglik(net, b.partition, b.params.k_max);
  auto sb = total_loglik(net.with_couplings({}), b.partition, b.params.k_max);
  for (auto pair : net.couplings()) sb.inter[pair] = 0.0;
  return sb;
}

// ---------------------------------------------------------------------------

int cmd_synth(const Options& o) {
  SyntheticSpec spec;
  if (!o.spec_file.empty()) {
    const auto j = Json::parse(read_text(o.spec_file));
    spec.n = j.value("n", spec.n);
    spec.modes = j.value("modes", spec.modes);
    spec.slices = j.value("slices", spec.slices);
    spec.k = j.value("k", spec.k);
    spec.p_in = j.value("p_in", spec.p_in);
    spec.p_out = j.value("p_out", spec.p_out);
    spec.participation = j.value("participation", spec.participation);
    spec.structure = parse_structure(j.value("structure", std::string(to_string(spec.structure))));
    spec.copy_p = j.value("copy_p", spec.copy_p);
    spec.relabel_q = j.value("relabel_q", spec.relabel_q);
    spec.copy_p_schedule = j.value("copy_p_schedule", spec.copy_p_schedule);
    spec.relabel_q_schedule = j.value("relabel_q_schedule", spec.relabel_q_schedule);
    spec.split_layers = j.value("split_layers", spec.split_layers);
    spec.mode_names = j.value("mode_names", spec.mode_names);
    const auto coupling = j.value("coupling", std::string("all-pairs"));
    if (coupling == "temporal") {
      spec.coupling = CouplingTopology::kTemporal;
    } else if (coupling != "all-pairs") {
      throw UsageError(fmt::format("spec coupling must be all-pairs or temporal, got '{}'", coupling));
    }
  } else if (o.preset == "case") {
    spec = case_preset();
  } else {
    spec.structure = parse_structure(o.preset);
  }
  spec.seed = o.seed;
  const auto s = generate(spec);
  Json resolved{{"n", spec.n},
                {"modes", spec.modes},
                {"slices", spec.slices},
                {"k", spec.k},
                {"p_in", spec.p_in},
                {"p_out", spec.p_out},
                {"participation", spec.participation},
                {"structure", std::string(to_string(spec.structure))},
                {"copy_p", spec.copy_p},
                {"relabel_q", spec.relabel_q},
                {"copy_p_schedule", spec.copy_p_schedule},
                {"relabel_q_schedule", spec.relabel_q_schedule},
                {"split_layers", spec.split_layers},
                {"coupling", spec.coupling == CouplingTopology::kTemporal ? "temporal" : "all-pairs"},
                {"seed", spec.seed}};
  const auto meta = metadata("synth", Json{{"spec", resolved}}, spec.seed);
  const fs::path out(o.out);
  save_network(s.network, out, preamble(meta));
  auto params = ModelParams::uniform(s.network, 1.0, 0.0);
  const auto truth = canonicalize(s.truth);
  save_partition(make_document(s.network, truth, params, total_loglik(s.network, truth), meta), out / "truth.json");
  write_text_atomic(out / "synth_spec.json", dump_json(resolved));
  return 0;
}

int cmd_backbone(const Options& o) {
  const auto net = load_input(o);
  auto [filtered, results] = backbone_network(net, o.alpha, o.keep_all);
  const auto meta = metadata("backbone", Json{{"alpha", o.alpha}, {"keep_all", o.keep_all}}, 0, input_record(o));
  const fs::path out(o.out);
  save_network(filtered, out, preamble(meta));
  report::Table pv{{"layer", "source", "target", "weight", "mu", "pvalue", "kept"}, {}};
  report::Table summary{{"layer", "edges_before", "edges_after", "density_before", "density_after"}, {}};
  const auto& reg = net.registry();
  for (LayerIndex l = 0; l < net.layer_count(); ++l) {
    const auto& layer = net.layer(l);
    const auto& r = results[l];
    std::size_t kept = 0;
    for (std::size_t i = 0; i < r.edges.size(); ++i) {
      const auto& e = r.edges[i];
      kept += r.kept[i];
      // Full precision here: p-values are the audit trail of the filter.
      pv.rows.push_back({layer.key(), reg[layer.vertex(e.a)].id, reg[layer.vertex(e.b)].id, fmt::format("{}", e.weight),
                         fmt::format("{}", e.mu), fmt::format("{}", e.pvalue), r.kept[i] ? "true" : "false"});
    }
    summary.rows.push_back({layer.key(), fmt::format("{}", r.edges.size()), fmt::format("{}", kept),
                            report::num(r.density_before), report::num(r.density_after)});
  }
  write_table(out, "pvalues.csv", pv, meta);
  write_table(out, "backbone.csv", summary, meta);
  return 0;
}

void write_partition(const fs::path& path, const MultilayerNetwork& scored_net, const Evaluation& ev,
                     const ModelParams& params, const Json& meta) {
  save_partition(make_document(scored_net, ev.partition, params, ev.scores, meta), path);
}

int cmd_infer(const Options& o) {
  const auto full = load_input(o);
  auto config = selection_config(o);
  const auto net = config.mode == SelectionMode::kMonolayer ? full.with_couplings({}) : full;
  const auto params = ModelParams::uniform(net, o.gamma, config.mode == SelectionMode::kMonolayer ? 0.0 : o.omega,
                                           o.k_max);
  const auto ev = evaluate(net, params, config, 0);
  auto cfg = selection_json(config, o.coupling);
  cfg["gamma"] = o.gamma;
  cfg["omega"] = o.omega;
  auto meta = metadata("infer", cfg, o.seed, input_record(o));
  meta["consensus"] = {{"iterations", ev.consensus_iterations}, {"converged", ev.consensus_converged}};
  write_partition(fs::path(o.out) / "partition.json", net, ev, params, meta);
  return 0;
}

Json trace_record(const MultilayerNetwork& net, const TraceRecord& r) {
  Json j{{"phase", r.phase}, {"pass", r.pass}, {"parameter", r.parameter}, {"score", r.score},
         {"accepted", r.accepted}, {"cached", r.cached}};
  j.update(params_json(net, r.params));
  return j;
}

int cmd_select(const Options& o) {
  const auto full = load_input(o);
  const auto config = selection_config(o);
  const fs::path out(o.out);
  auto run = [&](const SelectionConfig& c, const std::string& partition_name, const std::string& trace_name) {
    const auto net = c.mode == SelectionMode::kMonolayer ? full.with_couplings({}) : full;
    const auto trace = coordinate_ascent(full, c);
    auto meta = metadata("select", selection_json(c, o.coupling), o.seed, input_record(o));
    meta["selection"] = {{"passes", trace.passes},
                         {"converged", trace.converged},
                         {"evaluations", trace.evaluations},
                         {"consensus_iterations", trace.best.consensus_iterations},
                         {"consensus_converged", trace.best.consensus_converged}};
    std::string lines = Json{{"metadata", meta}}.dump() + "\n";
    for (const auto& r : trace.records) lines += trace_record(net, r).dump() + "\n";
    write_text_atomic(out / trace_name, lines);
    write_partition(out / partition_name, net, trace.best, trace.params, meta);
    return trace.best.scores.total;
  };
  const double total = run(config, "partition.json", "trace.jsonl");
  if (config.mode == SelectionMode::kMultilayer && o.baseline) {
    auto mono = config;
    mono.mode = SelectionMode::kMonolayer;
    const double base = run(mono, "baseline.json", "baseline_trace.jsonl");
    std::cout << report::format_delta(total, base) << "\n";
  }
  return 0;
}

BoundPartition load_bound(const std::string& path, const MultilayerNetwork& net, PartitionDocument& doc) {
  if (path.empty()) throw UsageError("--partition is required");
  doc = load_partition(path);
  return bind(doc, is_monolayer(doc) ? net.with_couplings({}) : net);
}

int cmd_metrics(const Options& o) {
  const auto net = load_input(o);
  PartitionDocument doc, other_doc;
  const auto bound = load_bound(o.partition, net, doc);
  const auto other = o.compare.empty() ? bound : load_bound(o.compare, net, other_doc);
  Json inputs = input_record(o);
  inputs["partition"] = digest_hex(hash_string(read_text(o.partition)));
  if (!o.compare.empty()) inputs["compare"] = digest_hex(hash_string(read_text(o.compare)));
  const auto meta = metadata("metrics", Json{{"aei_samples", o.samples}}, o.seed, inputs);
  const fs::path out(o.out);
  const auto pairs = report::rmi_pairs(net, bound.partition, other.partition);
  write_table(out, "rmi_pairs.csv", pairs, meta);
  write_table(out, "rmi_matrix.csv", report::rmi_matrix(net, pairs), meta);
  write_table(out, "aei.csv", report::aei_table(net, bound.partition, o.samples, o.seed), meta);
  const auto part = participation_and_power(net, bound.partition);
  write_table(out, "participation.csv", report::participation_table(net, part), meta);
  write_table(out, "power_shares.csv", report::coalition_table(net, part), meta);
  write_table(out, "similarity.csv", report::similarity_table(net), meta);
  return 0;
}

int cmd_report(const Options& o) {
  const auto net = load_input(o);
  PartitionDocument doc;
  const auto bound = load_bound(o.partition, net, doc);
  Json inputs = input_record(o);
  inputs["partition"] = digest_hex(hash_string(read_text(o.partition)));
  const auto scores = score_document(net, doc, bound);
  Json summary{{"mode", is_monolayer(doc) ? "monolayer" : "multilayer"},
               {"intra", report::num(scores.intra_sum())},
               {"inter", report::num(scores.inter_sum())},
               {"total", report::num(scores.total)}};
  if (!o.baseline_file.empty()) {
    PartitionDocument base_doc;
    const auto base = load_bound(o.baseline_file, net, base_doc);
    inputs["baseline"] = digest_hex(hash_string(read_text(o.baseline_file)));
    const auto base_scores = score_document(net, base_doc, base);
    summary["baseline_total"] = report::num(base_scores.total);
    summary["delta"] = report::num(scores.total - base_scores.total);
    summary["comparison"] = report::format_delta(scores.total, base_scores.total);
  }
  const auto meta = metadata("report", Json{{"aei_samples", o.samples}}, o.seed, inputs);
  const fs::path out(o.out);
  write_table(out, "scores.csv", report::score_table(net, scores), meta);
  const auto part = participation_and_power(net, bound.partition);
  write_table(out, "coalitions.csv", report::coalition_table(net, part), meta);
  write_table(out, "participation.csv", report::participation_table(net, part), meta);
  const auto pairs = report::rmi_pairs(net, bound.partition, bound.partition);
  write_table(out, "rmi_pairs.csv", pairs, meta);
  write_table(out, "rmi_grid.csv", report::rmi_matrix(net, pairs), meta);
  write_table(out, "aei.csv", report::aei_table(net, bound.partition, o.samples, o.seed), meta);
  write_table(out, "degrees.csv", report::degree_table(net, bound.partition), meta);
  Json doc_out{{"metadata", meta}, {"summary", summary}};
  write_text_atomic(out / "summary.json", dump_json(doc_out));
  if (summary.contains("comparison")) std::cout << summary["comparison"].get<std::string>() << "\n";
  return 0;
}

int cmd_score(const Options& o) {
  const auto net = load_input(o);
  PartitionDocument doc;
  const auto bound = load_bound(o.partition, net, doc);
  const auto sb = score_document(net, doc, bound);
  Json intra = Json::object(), inter = Json::object();
  for (LayerIndex l = 0; l < net.layer_count(); ++l) intra[net.layer(l).key()] = sb.intra[l];
  for (const auto& [pair, v] : sb.inter) inter[net.pair_key(pair)] = v;
  Json j{{"intra", intra}, {"inter", inter}, {"total", sb.total}};
  if (o.out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    write_text_atomic(o.out, dump_json(j));
  }
  return 0;
}

int fail(ErrorKind kind, const std::string& message) {
  const char* name = kind == ErrorKind::kUsage ? "usage" : kind == ErrorKind::kData ? "data" : "numeric";
  const int code = static_cast<int>(kind);
  std::cerr << Json{{"error", {{"kind", name}, {"exit_code", code}, {"message", message}}}}.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coalmux: coalition structure in multilayer networks"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  Options o;

  auto input = [&](CLI::App* sub) {
    sub->add_option("--in", o.in, "Network directory (vertices.csv, layers.csv, edges.csv, ...)")->required();
    sub->add_option("--coupling", o.coupling, "all-pairs | temporal | custom:<file>");
  };
  auto seed = [&](CLI::App* sub) { sub->add_option("--seed", o.seed, "Base seed"); };
  auto model = [&](CLI::App* sub) {
    sub->add_option("--mode", o.mode, "multilayer | monolayer")->check(CLI::IsMember({"multilayer", "monolayer"}));
    sub->add_option("--runs", o.runs, "Maximizer runs per evaluation")->check(CLI::PositiveNumber);
    sub->add_option("--kmax", o.k_max, "Community cap per layer (0 = unbounded)")->check(CLI::NonNegativeNumber);
  };

  auto* synth = app.add_subcommand("synth", "Generate a network with planted coalitions");
  synth->add_option("--preset", o.preset, "case | pillar | semipillar | hierarchy | overlap");
  synth->add_option("--spec", o.spec_file, "JSON spec file (overrides --preset)");
  seed(synth);
  synth->add_option("--out", o.out, "Output directory")->required();

  auto* backbone = app.add_subcommand("backbone", "Keep edges significant against the strength null");
  input(backbone);
  backbone->add_option("--alpha", o.alpha, "Significance threshold in (0, 1]");
  backbone->add_flag("--keep-all", o.keep_all, "Keep every edge (alpha = 1 semantics)");
  backbone->add_option("--out", o.out, "Output directory")->required();

  auto* infer = app.add_subcommand("infer", "Consensus partition at fixed uniform parameters");
  input(infer);
  model(infer);
  seed(infer);
  infer->add_option("--gamma", o.gamma, "Resolution")->check(CLI::PositiveNumber);
  infer->add_option("--omega", o.omega, "Coupling")->check(CLI::NonNegativeNumber);
  infer->add_option("--out", o.out, "Output directory")->required();

  auto* select = app.add_subcommand("select", "Grid initialization and coordinate ascent on P(g)");
  input(select);
  model(select);
  seed(select);
  select->add_option("--gamma-grid", o.gamma_grid, "Comma-separated resolutions")->delimiter(',');
  select->add_option("--omega-grid", o.omega_grid, "Comma-separated couplings")->delimiter(',');
  select->add_option("--step-gamma", o.step_gamma, "Resolution step");
  select->add_option("--step-omega", o.step_omega, "Coupling step");
  select->add_option("--max-passes", o.max_passes, "Sweep limit");
  select->add_flag("!--no-baseline", o.baseline, "Skip the monolayer baseline");
  select->add_option("--out", o.out, "Output directory")->required();

  auto* metrics = app.add_subcommand("metrics", "RMI, AEI, participation, power and layer similarity");
  input(metrics);
  seed(metrics);
  metrics->add_option("--partition", o.partition, "partition.json")->required();
  metrics->add_option("--compare", o.compare, "Second partition.json for the RMI grid");
  metrics->add_option("--samples", o.samples, "Rewired samples for AEI")->check(CLI::PositiveNumber);
  metrics->add_option("--out", o.out, "Output directory")->required();

  auto* rep = app.add_subcommand("report", "Plot-ready tables for a fitted partition");
  input(rep);
  seed(rep);
  rep->add_option("--partition", o.partition, "partition.json")->required();
  rep->add_option("--baseline", o.baseline_file, "Monolayer partition.json for the comparison");
  rep->add_option("--samples", o.samples, "Rewired samples for AEI")->check(CLI::PositiveNumber);
  rep->add_option("--out", o.out, "Output directory")->required();

  auto* score = app.add_subcommand("score", "Recompute P(g) of a partition");
  input(score);
  score->add_option("--partition", o.partition, "partition.json")->required();
  score->add_option("--out", o.out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(ErrorKind::kUsage, e.what());
  }

  try {
    if (*synth) return cmd_synth(o);
    if (*backbone) return cmd_backbone(o);
    if (*infer) return cmd_infer(o);
    if (*select) return cmd_select(o);
    if (*metrics) return cmd_metrics(o);
    if (*rep) return cmd_report(o);
    if (*score) return cmd_score(o);
  } catch (const Error& e) {
    return fail(e.kind(), e.what());
  } catch (const Json::exception& e) {
    return fail(ErrorKind::kData, e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(ErrorKind::kData, e.what());
  }
  return fail(ErrorKind::kUsage, "no subcommand");
}
