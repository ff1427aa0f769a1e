// Copyright 2026 The caia Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.h"

#include <csignal>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <set>

#include <CLI11.hpp>

#include "caia/attack.h"
#include "caia/attribution.h"
#include "caia/errors.h"
#include "caia/evaluation.h"
#include "caia/filter.h"
#include "caia/io.h"
#include "caia/oracle.h"
#include "caia/simulator.h"

namespace caia::cli {
namespace {

namespace fs = std::filesystem;
using io::Json;

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kEmptyAttackSet:
      return kEmptyAttackSet;
    case ErrorKind::kProtocol:
    case ErrorKind::kTransport:
    case ErrorKind::kMissingRecord:
      return kOracleFailure;
    default:
      return kUsage;
  }
}

std::string ParentDir(const std::string& path) {
  return fs::path(path).parent_path().string();
}

struct OracleOptions {
  std::string kind = "file";
  std::string locator;
  std::size_t batch_size = 32;
  std::size_t max_in_flight = 4;

  void Register(CLI::App* cmd, bool required) {
    cmd->add_option("--oracle-kind", kind, "file, http or simulator")
        ->check(CLI::IsMember({"file", "http", "simulator"}));
    auto* opt = cmd->add_option(
        "--oracle", locator,
        "logits JSONL path, oracle base URL, or scenario config path");
    if (required) opt->required();
    cmd->add_option("--batch-size", batch_size, "images per HTTP request")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--max-in-flight", max_in_flight,
                    "concurrent HTTP batches")
        ->check(CLI::PositiveNumber);
  }

  OracleDescriptor Descriptor(const std::string& image_root) const {
    OracleDescriptor d;
    d.kind = ParseOracleKind(kind);
    d.locator = locator;
    d.batch_size = batch_size;
    d.max_in_flight = max_in_flight;
    d.image_root = image_root;
    return d;
  }

  Json Echo() const {
    Json j;
    j["kind"] = kind;
    j["locator"] = locator;
    j["batch_size"] = batch_size;
    j["max_in_flight"] = max_in_flight;
    return j;
  }
};

// ---------------------------------------------------------------------------

struct FilterArgs {
  std::string candidates;
  double tau = kDefaultFilterThreshold;
  std::size_t target = 300;
  std::string out;
  std::string decisions;
  bool no_filter = false;
  OracleOptions oracle;
};

int CmdFilter(const FilterArgs& a) {
  if (!(a.tau >= 0.0 && a.tau <= 1.0)) {
    throw Error(ErrorKind::kConfiguration, "--tau must lie in [0, 1]");
  }
  io::Manifest manifest = io::ReadManifest(a.candidates);
  const AttributeSpace& space = manifest.attribute;

  if (!a.no_filter && !a.oracle.locator.empty()) {
    // Score images whose classifier output is not in the manifest yet.
    const auto d = a.oracle.Descriptor(ParentDir(a.candidates));
    std::vector<std::string> images;
    std::vector<std::pair<std::size_t, std::string>> slots;
    for (std::size_t i = 0; i < manifest.tuples.size(); ++i) {
      auto& t = manifest.tuples[i];
      for (const auto& v : space.values()) {
        auto img = t.images.find(v);
        if (!t.scores.contains(v) && img != t.images.end()) {
          images.push_back(img->second);
          slots.emplace_back(i, v);
        }
      }
    }
    if (!images.empty()) {
      auto rows = FetchAttributeScores(d, space, images);
      for (std::size_t j = 0; j < rows.size(); ++j) {
        manifest.tuples[slots[j].first].scores[slots[j].second] =
            std::move(rows[j]);
      }
    }
  }

  Json config;
  config["command"] = "filter";
  config["candidates"] = a.candidates;
  config["tau"] = a.tau;
  config["target"] = a.target;
  config["no_filter"] = a.no_filter;
  if (!a.oracle.locator.empty()) config["oracle"] = a.oracle.Echo();

  const std::string decisions_path =
      a.decisions.empty() ? a.out + ".decisions.json" : a.decisions;
  AttackSetBuild build;
  try {
    build = BuildAttackSet(manifest.tuples, a.tau, a.target, space,
                           a.no_filter ? FilterMode::kBypass
                                       : FilterMode::kThreshold);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kEmptyAttackSet) {
      // Still record why every candidate failed.
      std::vector<FilterDecision> decisions;
      for (const auto& c : manifest.tuples) {
        decisions.push_back(FilterTuple(c, a.tau, space));
      }
      io::WriteJson(decisions_path, io::DecisionsToJson(decisions, config));
    }
    throw;
  }
  io::WriteJson(a.out, io::AttackSetToJson(space, build.accepted, config));
  io::WriteJson(decisions_path, io::DecisionsToJson(build.decisions, config));
  std::cerr << "filter: accepted " << build.accepted.size() << " of "
            << build.decisions.size() << " examined candidates\n";
  if (build.under_target) {
    std::cerr << "warning: only " << build.accepted.size() << " tuples passed, "
              << "target was " << a.target << "\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct AttackArgs {
  std::string manifest;
  std::optional<std::size_t> sample_limit;
  std::uint64_t seed = 0;
  std::string out;
  OracleOptions oracle;
};

Json AttackConfig(const AttackArgs& a, const char* command) {
  Json config;
  config["command"] = command;
  config["manifest"] = a.manifest;
  config["oracle"] = a.oracle.Echo();
  config["sample_limit"] = a.sample_limit ? Json(*a.sample_limit) : Json(nullptr);
  config["seed"] = a.seed;
  return config;
}

void ReportSkipped(const std::vector<SkippedTuple>& skipped) {
  for (const auto& s : skipped) {
    std::cerr << "skipped tuple " << s.tuple_id << ": " << s.reason << "\n";
  }
}

int CmdAttack(const AttackArgs& a) {
  const io::Manifest manifest = io::ReadManifest(a.manifest);
  const auto tuples = io::ToAttackTuples(manifest);
  auto source = MakeLogitSource(a.oracle.Descriptor(ParentDir(a.manifest)));
  AttackOptions options;
  options.sample_limit = a.sample_limit;
  const AttackResult result =
      RunAttack(tuples, *source, manifest.attribute, options);
  ReportSkipped(result.skipped);

  Json doc = io::PredictionsToJson(manifest.attribute, result.predictions,
                                   AttackConfig(a, "attack"));
  doc["tuples_used"] = result.used_tuple_ids.size();
  Json skipped = Json::array();
  for (const auto& s : result.skipped) {
    skipped.push_back({{"tuple_id", s.tuple_id}, {"reason", s.reason}});
  }
  doc["skipped"] = std::move(skipped);
  io::WriteJson(a.out, doc);
  std::cerr << "attack: " << result.predictions.size() << " classes from "
            << result.used_tuple_ids.size() << " tuples\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::vector<std::string> inputs;
  std::string truth;
  std::string out;
  std::string table;
  bool aggregate = false;
};

int CmdEval(const EvalArgs& a) {
  if (a.inputs.size() > 1 && !a.aggregate) {
    throw Error(ErrorKind::kConfiguration,
                "several inputs given; pass --aggregate to combine them");
  }
  std::optional<GroundTruth> truth;
  std::vector<MetricsReport> reports;
  for (const auto& path : a.inputs) {
    const Json doc = io::ReadJson(path);
    if (doc.is_object() && doc.value("format", "") == io::kReportFormat) {
      reports.push_back(io::ReportFromJson(doc));
      continue;
    }
    const io::Predictions p = io::PredictionsFromJson(doc);
    if (a.truth.empty()) {
      throw Error(ErrorKind::kConfiguration, "--truth is required for predictions");
    }
    if (!truth) truth = io::ReadGroundTruth(a.truth);
    reports.push_back(Evaluate(p.classes, *truth, p.attribute));
  }
  const MetricsReport report = AggregateRuns(reports);

  Json config;
  config["command"] = "eval";
  config["inputs"] = a.inputs;
  config["truth"] = a.truth;
  config["aggregate"] = a.aggregate;
  io::WriteJson(a.out, io::ReportToJson(report, config));
  const std::string table = io::ReportTable(report);
  if (a.table.empty()) {
    std::cout << table;
  } else {
    io::WriteFile(a.table, table);
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct AblateArgs {
  AttackArgs attack;
  std::string truth;
  std::vector<std::size_t> sizes;
  std::size_t repeats = 1;
};

int CmdAblate(const AblateArgs& a) {
  const io::Manifest manifest = io::ReadManifest(a.attack.manifest);
  const auto tuples = io::ToAttackTuples(manifest);
  for (std::size_t s : a.sizes) {
    if (s == 0 || s > tuples.size()) {
      throw Error(ErrorKind::kConfiguration,
                  "size " + std::to_string(s) + " outside [1, " +
                      std::to_string(tuples.size()) + "]");
    }
  }
  const GroundTruth truth = io::ReadGroundTruth(a.truth);
  auto source =
      MakeLogitSource(a.attack.oracle.Descriptor(ParentDir(a.attack.manifest)));
  const auto curve = Ablate(tuples, *source, manifest.attribute, truth, a.sizes,
                            a.repeats, a.attack.seed);

  Json config = AttackConfig(a.attack, "ablate");
  config.erase("sample_limit");
  config["truth"] = a.truth;
  config["sizes"] = a.sizes;
  config["repeats"] = a.repeats;

  if (fs::path(a.attack.out).extension() == ".csv") {
    std::string csv = "size,mean_accuracy,std_accuracy,repeats,disjoint\n";
    for (const auto& p : curve) {
      csv += std::to_string(p.size) + "," + Json(p.mean_accuracy).dump() + "," +
             Json(p.std_accuracy).dump() + "," + std::to_string(a.repeats) + "," +
             (p.disjoint ? "true" : "false") + "\n";
    }
    io::WriteFile(a.attack.out, csv);
  } else {
    Json doc;
    doc["format"] = io::kCurveFormat;
    doc["attribute"] = io::AttributeToJson(manifest.attribute);
    Json points = Json::array();
    for (const auto& p : curve) {
      Json point;
      point["size"] = p.size;
      point["mean_accuracy"] = p.mean_accuracy;
      point["std_accuracy"] = p.std_accuracy;
      point["disjoint"] = p.disjoint;
      point["accuracies"] = p.accuracies;
      points.push_back(std::move(point));
    }
    doc["curve"] = std::move(points);
    doc["config"] = std::move(config);
    io::WriteJson(a.attack.out, doc);
  }
  for (const auto& p : curve) {
    std::cerr << "ablate: size " << p.size << " mean " << p.mean_accuracy
              << " std " << p.std_accuracy << (p.disjoint ? "" : " (overlapping)")
              << "\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string truth;
  std::string manifest;
  std::string export_logits;
  std::string prompts;
  std::string serve;
  std::string port_file;
};

std::pair<std::string, int> ParseBindAddress(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos || colon == 0) {
    throw Error(ErrorKind::kConfiguration, "--serve expects host:port");
  }
  int port = -1;
  try {
    port = std::stoi(addr.substr(colon + 1));
  } catch (const std::exception&) {
  }
  if (port < 0 || port > 65535) {
    throw Error(ErrorKind::kConfiguration, "bad port in '" + addr + "'");
  }
  return {addr.substr(0, colon), port};
}

int CmdSimulate(const SimulateArgs& a) {
  ScenarioConfig config = io::ReadScenarioConfig(a.config);
  if (a.seed) config.seed = *a.seed;
  if (!a.prompts.empty()) {
    config.attribute = io::AttachPrompts(config.attribute, a.prompts);
  }
  auto scenario = std::make_shared<const Scenario>(Scenario::Generate(config));

  Json echo;
  echo["command"] = "simulate";
  echo["scenario"] = io::ScenarioConfigToJson(config);

  if (!a.truth.empty()) {
    GroundTruth truth;
    for (std::size_t y = 0; y < scenario->num_classes(); ++y) {
      truth[y] = scenario->TruthValue(y);
    }
    io::WriteGroundTruth(a.truth, truth);
  }
  if (!a.manifest.empty()) {
    io::WriteJson(a.manifest, io::AttackSetToJson(scenario->attribute(),
                                                  scenario->AttackSet(), echo));
  }
  if (!a.export_logits.empty()) {
    std::vector<LogitRecord> records;
    for (const auto& id : scenario->TupleIds()) {
      for (const auto& v : scenario->attribute().values()) {
        records.push_back({id, v, scenario->Logits(id, v)});
      }
    }
    WriteLogitFile(a.export_logits, scenario->num_classes(), records);
  }
  if (a.serve.empty()) return kOk;

  auto [host, port] = ParseBindAddress(a.serve);
  // Block termination signals before the server spawns its threads so only
  // sigwait below sees them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  SimulatorServer server(scenario);
  const int bound = server.Bind(host, port);
  if (!a.port_file.empty()) io::WriteFile(a.port_file, std::to_string(bound) + "\n");
  std::cerr << "serving " << kSimulatorModelName << " on " << host << ":" << bound
            << "\n";
  server.Start();
  int sig = 0;
  sigwait(&signals, &sig);
  server.Stop();
  return kOk;
}

// ---------------------------------------------------------------------------

struct AttributionArgs {
  std::string samples;
  std::string out;
};

// {"samples": [{"name": str?, "map": grid path, "masks": {label: png path}}]}
int CmdAttribution(const AttributionArgs& a) {
  const Json doc = io::ReadJson(a.samples);
  const std::string root = ParentDir(a.samples);
  auto resolve = [&](const std::string& p) {
    return fs::path(p).is_relative() ? (fs::path(root) / p).string() : p;
  };
  if (!doc.is_object() || !doc.contains("samples") || !doc["samples"].is_array()) {
    throw Error(ErrorKind::kConfiguration,
                a.samples + ": expected {\"samples\": [...]}");
  }
  std::vector<AttributionSample> samples;
  for (const auto& s : doc["samples"]) {
    if (!s.is_object() || !s.contains("map") || !s["map"].is_string() ||
        !s.contains("masks") || !s["masks"].is_object()) {
      throw Error(ErrorKind::kConfiguration,
                  a.samples + ": each sample needs 'map' and 'masks'");
    }
    AttributionSample sample;
    sample.name = s.value("name", s["map"].get<std::string>());
    sample.map = ReadFloatGrid(resolve(s["map"].get<std::string>()));
    for (const auto& [label, path] : s["masks"].items()) {
      if (!path.is_string()) {
        throw Error(ErrorKind::kConfiguration, "mask path must be a string");
      }
      sample.masks.emplace(label, ReadMaskPng(resolve(path.get<std::string>()), label));
    }
    samples.push_back(std::move(sample));
  }
  const auto report = RelativeAttribution(samples);

  Json out;
  out["format"] = "caia-attribution/1";
  Json regions = Json::object();
  for (const auto& [label, r] : report.regions) {
    regions[label] = {{"mean_share", r.mean_share}, {"samples", r.samples}};
  }
  out["regions"] = std::move(regions);
  out["config"] = {{"command", "attribution"}, {"samples", a.samples}};
  io::WriteJson(a.out, out);
  return kOk;
}

}  // namespace

int Run(const std::vector<std::string>& args) {
  CLI::App app{"Class attribute inference against black-box image classifiers"};
  app.name("caia");
  app.require_subcommand(1);

  FilterArgs filter;
  auto* filter_cmd =
      app.add_subcommand("filter", "build an attack set from scored candidates");
  filter_cmd->add_option("--candidates", filter.candidates, "candidate manifest")
      ->required();
  filter_cmd->add_option("--tau", filter.tau, "attribute classifier threshold");
  filter_cmd->add_option("--target", filter.target, "tuples to collect")
      ->check(CLI::PositiveNumber);
  filter_cmd->add_option("--out", filter.out, "attack-set manifest")->required();
  filter_cmd->add_option("--decisions", filter.decisions,
                         "decisions report (default <out>.decisions.json)");
  filter_cmd->add_flag("--no-filter", filter.no_filter,
                       "accept the first --target candidates unconditionally");
  filter.oracle.Register(filter_cmd, /*required=*/false);

  AttackArgs attack;
  auto* attack_cmd = app.add_subcommand("attack", "infer class attributes");
  auto add_attack_options = [](CLI::App* cmd, AttackArgs& a) {
    cmd->add_option("--manifest", a.manifest, "attack-set manifest")->required();
    cmd->add_option("--seed", a.seed, "seed for every random choice");
    cmd->add_option("--out", a.out, "output file")->required();
    a.oracle.Register(cmd, /*required=*/true);
  };
  add_attack_options(attack_cmd, attack);
  attack_cmd->add_option("--sample-limit", attack.sample_limit,
                         "use the first N tuples by id");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "score predictions against truth");
  eval_cmd->add_option("--predictions", eval.inputs,
                       "predictions or report files")
      ->required();
  eval_cmd->add_option("--truth", eval.truth, "ground truth CSV");
  eval_cmd->add_option("--out", eval.out, "report JSON")->required();
  eval_cmd->add_option("--table", eval.table, "write the text table here");
  eval_cmd->add_flag("--aggregate", eval.aggregate,
                     "average several runs into one report");

  AblateArgs ablate;
  auto* ablate_cmd =
      app.add_subcommand("ablate", "accuracy versus number of attack tuples");
  add_attack_options(ablate_cmd, ablate.attack);
  ablate_cmd->add_option("--truth", ablate.truth, "ground truth CSV")->required();
  ablate_cmd->add_option("--sizes", ablate.sizes, "tuple counts")
      ->delimiter(',')
      ->required();
  ablate_cmd->add_option("--repeats", ablate.repeats, "subsets per size")
      ->check(CLI::PositiveNumber);

  SimulateArgs simulate;
  auto* simulate_cmd =
      app.add_subcommand("simulate", "synthetic target model and attack set");
  simulate_cmd->add_option("--config", simulate.config, "scenario JSON")->required();
  simulate_cmd->add_option("--seed", simulate.seed, "override the scenario seed");
  simulate_cmd->add_option("--truth", simulate.truth, "write ground truth CSV");
  simulate_cmd->add_option("--manifest", simulate.manifest,
                           "write the scenario attack set");
  simulate_cmd->add_option("--export-logits", simulate.export_logits,
                           "write every attack image's logits as JSONL");
  simulate_cmd->add_option("--prompts", simulate.prompts,
                           "edit-prompt data file to attach as metadata");
  simulate_cmd->add_option("--serve", simulate.serve,
                           "serve the oracle protocol on host:port");
  simulate_cmd->add_option("--port-file", simulate.port_file,
                           "write the bound port here");

  AttributionArgs attribution;
  auto* attribution_cmd = app.add_subcommand(
      "attribution", "share of attribution mass inside segmentation regions");
  attribution_cmd->add_option("--samples", attribution.samples, "samples list")
      ->required();
  attribution_cmd->add_option("--out", attribution.out, "report JSON")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*filter_cmd) return CmdFilter(filter);
    if (*attack_cmd) return CmdAttack(attack);
    if (*eval_cmd) return CmdEval(eval);
    if (*ablate_cmd) return CmdAblate(ablate);
    if (*simulate_cmd) return CmdSimulate(simulate);
    if (*attribution_cmd) return CmdAttribution(attribution);
  } catch (const Error& e) {
    std::cerr << "caia: " << e.what() << "\n";
    return ExitCodeFor(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "caia: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace caia::cli
