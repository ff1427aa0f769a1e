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

#include "caia/io.h"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "caia/errors.h"

namespace caia::io {
namespace {

[[noreturn]] void Bad(const std::string& what) {
  throw Error(ErrorKind::kConfiguration, what);
}

const Json& Require(const Json& doc, const char* key, const std::string& where) {
  auto it = doc.find(key);
  if (it == doc.end()) Bad(where + ": missing '" + key + "'");
  return *it;
}

std::string RequireString(const Json& doc, const char* key,
                          const std::string& where) {
  const Json& v = Require(doc, key, where);
  if (!v.is_string()) Bad(where + ": '" + key + "' must be a string");
  return v.get<std::string>();
}

double RequireNumber(const Json& doc, const char* key, const std::string& where) {
  const Json& v = Require(doc, key, where);
  if (!v.is_number()) Bad(where + ": '" + key + "' must be a number");
  return v.get<double>();
}

std::size_t RequireCount(const Json& doc, const char* key,
                         const std::string& where) {
  const Json& v = Require(doc, key, where);
  if (!v.is_number_unsigned()) {
    Bad(where + ": '" + key + "' must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

void RequireFormat(const Json& doc, std::string_view format,
                   const std::string& where) {
  if (!doc.is_object() || !doc.contains("format") ||
      doc["format"] != std::string(format)) {
    Bad(where + ": expected format " + std::string(format));
  }
}

Json OptionalNumber(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

std::optional<double> OptionalFromJson(const Json& v, const std::string& where) {
  if (v.is_null()) return std::nullopt;
  if (!v.is_number()) Bad(where + ": expected a number or null");
  return v.get<double>();
}

Json PerValueToJson(const std::vector<std::string>& labels,
                    const std::vector<ValueMetrics>& metrics) {
  Json out = Json::object();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out[labels[i]] = {{"precision", OptionalNumber(metrics[i].precision)},
                      {"recall", OptionalNumber(metrics[i].recall)},
                      {"f1", OptionalNumber(metrics[i].f1)}};
  }
  return out;
}

std::vector<ValueMetrics> PerValueFromJson(const Json& doc,
                                           const std::vector<std::string>& labels,
                                           const std::string& where) {
  if (!doc.is_object()) Bad(where + ": per_value must be an object");
  std::vector<ValueMetrics> out;
  for (const auto& label : labels) {
    const Json& m = Require(doc, label.c_str(), where);
    out.push_back({OptionalFromJson(Require(m, "precision", where), where),
                   OptionalFromJson(Require(m, "recall", where), where),
                   OptionalFromJson(Require(m, "f1", where), where)});
  }
  return out;
}

std::string Fixed(const std::optional<double>& v) {
  if (!v) return "n/a";
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << *v;
  return s.str();
}

}  // namespace

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteFile(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorKind::kIo, "failed writing " + path);
}

Json ReadJson(const std::string& path) {
  Json doc = Json::parse(ReadFile(path), nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) Bad(path + ": not valid JSON");
  return doc;
}

void WriteJson(const std::string& path, const Json& doc) {
  WriteFile(path, doc.dump(2) + "\n");
}

Json AttributeToJson(const AttributeSpace& space) {
  Json out;
  out["name"] = space.name();
  out["values"] = std::vector<std::string>(space.values().begin(),
                                           space.values().end());
  if (!space.prompts().empty()) {
    Json prompts = Json::object();
    for (const auto& v : space.values()) {
      auto it = space.prompts().find(v);
      if (it != space.prompts().end()) prompts[v] = it->second;
    }
    out["prompts"] = prompts;
  }
  return out;
}

AttributeSpace AttributeFromJson(const Json& doc) {
  const std::string where = "attribute";
  if (!doc.is_object()) Bad("attribute must be an object");
  const std::string name = RequireString(doc, "name", where);
  const Json& values = Require(doc, "values", where);
  if (!values.is_array()) Bad("attribute values must be an array");
  std::vector<std::string> labels;
  for (const auto& v : values) {
    if (!v.is_string()) Bad("attribute values must be strings");
    labels.push_back(v.get<std::string>());
  }
  std::map<std::string, std::string> prompts;
  if (auto it = doc.find("prompts"); it != doc.end()) {
    if (!it->is_object()) Bad("attribute prompts must be an object");
    for (const auto& [k, v] : it->items()) {
      if (!v.is_string()) Bad("prompt for '" + k + "' must be a string");
      prompts[k] = v.get<std::string>();
    }
  }
  return AttributeSpace(name, std::move(labels), std::move(prompts));
}

AttributeSpace AttachPrompts(const AttributeSpace& space,
                             const std::string& prompts_path) {
  const Json doc = ReadJson(prompts_path);
  const std::string prefix = doc.value("prefix", std::string());
  auto attrs = doc.find("attributes");
  if (attrs == doc.end() || !attrs->is_object()) {
    Bad(prompts_path + ": missing 'attributes' object");
  }
  auto entry = attrs->find(space.name());
  if (entry == attrs->end()) return space;
  std::map<std::string, std::string> prompts;
  for (const auto& v : space.values()) {
    auto p = entry->find(v);
    if (p != entry->end() && p->is_string()) {
      prompts[v] = prefix + p->get<std::string>();
    }
  }
  return AttributeSpace(space.name(),
                        std::vector<std::string>(space.values().begin(),
                                                 space.values().end()),
                        std::move(prompts));
}

Manifest ReadManifest(const std::string& path) {
  const Json doc = ReadJson(path);
  RequireFormat(doc, kAttackSetFormat, path);
  Manifest m{AttributeFromJson(Require(doc, "attribute", path)), {}};
  const Json& tuples = Require(doc, "tuples", path);
  if (!tuples.is_array()) Bad(path + ": 'tuples' must be an array");
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    const Json& t = tuples[i];
    const std::string where = path + ": tuple " + std::to_string(i);
    if (!t.is_object()) Bad(where + " is not an object");
    CandidateTuple c;
    c.id = RequireString(t, "id", where);
    const Json& images = Require(t, "images", where);
    if (!images.is_object()) Bad(where + ": 'images' must be an object");
    for (const auto& [value, ref] : images.items()) {
      if (!ref.is_string()) Bad(where + ": image for '" + value + "' must be a string");
      c.images[value] = ref.get<std::string>();
    }
    if (auto s = t.find("scores"); s != t.end() && !s->is_null()) {
      if (!s->is_object()) Bad(where + ": 'scores' must be an object");
      for (const auto& [value, probs] : s->items()) {
        if (!probs.is_array()) Bad(where + ": scores for '" + value + "' must be an array");
        std::vector<double> row;
        for (const auto& p : probs) {
          if (!p.is_number()) Bad(where + ": non-numeric score");
          row.push_back(p.get<double>());
        }
        c.scores[value] = std::move(row);
      }
    }
    m.tuples.push_back(std::move(c));
  }
  return m;
}

std::vector<AttackTuple> ToAttackTuples(const Manifest& manifest) {
  std::vector<AttackTuple> out;
  out.reserve(manifest.tuples.size());
  for (const auto& c : manifest.tuples) {
    AttackTuple t{c.id, c.images, std::nullopt};
    if (!c.scores.empty()) t.filter_scores = c.scores;
    out.push_back(std::move(t));
  }
  return out;
}

Json AttackSetToJson(const AttributeSpace& space,
                     std::span<const AttackTuple> tuples, const Json& config) {
  Json doc;
  doc["format"] = kAttackSetFormat;
  doc["attribute"] = AttributeToJson(space);
  Json list = Json::array();
  for (const auto& t : tuples) {
    Json entry;
    entry["id"] = t.id;
    Json images = Json::object();
    for (const auto& v : space.values()) images[v] = t.images.at(v);
    entry["images"] = images;
    if (t.filter_scores) {
      Json scores = Json::object();
      for (const auto& v : space.values()) {
        auto it = t.filter_scores->find(v);
        if (it != t.filter_scores->end()) scores[v] = it->second;
      }
      entry["scores"] = scores;
    }
    list.push_back(std::move(entry));
  }
  doc["tuples"] = std::move(list);
  doc["config"] = config;
  return doc;
}

Json DecisionsToJson(std::span<const FilterDecision> decisions,
                     const Json& config) {
  Json doc;
  doc["format"] = kDecisionsFormat;
  std::size_t accepted = 0;
  Json list = Json::array();
  for (const auto& d : decisions) {
    Json failures = Json::array();
    for (const auto& f : d.failures) {
      failures.push_back({{"value", f.value},
                          {"reason", std::string(FilterFailureName(f.reason))}});
    }
    list.push_back({{"tuple_id", d.tuple_id},
                    {"accepted", d.accepted},
                    {"failures", std::move(failures)}});
    accepted += d.accepted ? 1 : 0;
  }
  doc["examined"] = decisions.size();
  doc["accepted"] = accepted;
  doc["decisions"] = std::move(list);
  doc["config"] = config;
  return doc;
}

Json PredictionsToJson(const AttributeSpace& space,
                       std::span<const ClassPrediction> predictions,
                       const Json& config) {
  Json doc;
  doc["format"] = kPredictionsFormat;
  doc["attribute"] = AttributeToJson(space);
  Json classes = Json::array();
  for (const auto& p : predictions) {
    Json advantage = Json::object();
    for (std::size_t z = 0; z < space.size(); ++z) {
      advantage[space.value(z)] = p.advantage_totals.at(z);
    }
    Json entry;
    entry["class_id"] = p.class_id;
    entry["predicted"] = p.predicted_value;
    entry["tie"] = p.tie;
    entry["advantage"] = std::move(advantage);
    classes.push_back(std::move(entry));
  }
  doc["classes"] = std::move(classes);
  doc["config"] = config;
  return doc;
}

Predictions PredictionsFromJson(const Json& doc) {
  const std::string where = "predictions";
  RequireFormat(doc, kPredictionsFormat, where);
  Predictions out{AttributeFromJson(Require(doc, "attribute", where)), {}};
  const Json& classes = Require(doc, "classes", where);
  if (!classes.is_array()) Bad("predictions: 'classes' must be an array");
  for (const auto& c : classes) {
    ClassPrediction p;
    p.class_id = RequireCount(c, "class_id", where);
    p.predicted_value = RequireString(c, "predicted", where);
    auto index = out.attribute.IndexOf(p.predicted_value);
    if (!index) Bad("predictions: unknown value '" + p.predicted_value + "'");
    p.predicted_index = *index;
    const Json& tie = Require(c, "tie", where);
    if (!tie.is_boolean()) Bad("predictions: 'tie' must be a boolean");
    p.tie = tie.get<bool>();
    const Json& adv = Require(c, "advantage", where);
    for (const auto& v : out.attribute.values()) {
      p.advantage_totals.push_back(RequireNumber(adv, v.c_str(), where));
    }
    out.classes.push_back(std::move(p));
  }
  return out;
}

Json ReportToJson(const MetricsReport& report, const Json& config) {
  const auto& labels = report.confusion.labels();
  Json doc;
  doc["format"] = kReportFormat;
  doc["accuracy"] = report.accuracy;
  doc["accuracy_std"] = report.accuracy_std;
  doc["per_value"] = PerValueToJson(labels, report.per_value);
  Json confusion = Json::array();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < labels.size(); ++j) {
      row.push_back(report.confusion.at(i, j));
    }
    confusion.push_back(std::move(row));
  }
  doc["confusion"] = std::move(confusion);
  doc["runs"] = report.runs;
  doc["tie_rate"] = report.tie_rate;
  if (report.pooled) doc["pooled_per_value"] = PerValueToJson(labels, *report.pooled);
  doc["config"] = config;
  return doc;
}

MetricsReport ReportFromJson(const Json& doc) {
  const std::string where = "report";
  RequireFormat(doc, kReportFormat, where);
  const Json& per_value = Require(doc, "per_value", where);
  if (!per_value.is_object()) Bad("report: per_value must be an object");
  std::vector<std::string> labels;
  for (const auto& [label, m] : per_value.items()) labels.push_back(label);

  MetricsReport r;
  r.accuracy = RequireNumber(doc, "accuracy", where);
  r.accuracy_std = RequireNumber(doc, "accuracy_std", where);
  r.per_value = PerValueFromJson(per_value, labels, where);
  r.runs = RequireCount(doc, "runs", where);
  r.tie_rate = RequireNumber(doc, "tie_rate", where);
  ConfusionMatrix confusion(labels);
  const Json& rows = Require(doc, "confusion", where);
  if (!rows.is_array() || rows.size() != labels.size()) {
    Bad("report: confusion must be a k x k array");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!rows[i].is_array() || rows[i].size() != labels.size()) {
      Bad("report: confusion must be a k x k array");
    }
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (!rows[i][j].is_number_unsigned()) Bad("report: confusion counts must be integers");
      confusion.Add(i, j, rows[i][j].get<std::uint64_t>());
    }
  }
  r.confusion = std::move(confusion);
  if (auto p = doc.find("pooled_per_value"); p != doc.end()) {
    r.pooled = PerValueFromJson(*p, labels, where);
  }
  return r;
}

std::string ReportTable(const MetricsReport& report) {
  const auto& labels = report.confusion.labels();
  std::size_t width = 5;
  for (const auto& l : labels) width = std::max(width, l.size());
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << "accuracy " << report.accuracy << " (std " << report.accuracy_std
      << ", runs " << report.runs << ", tie rate " << report.tie_rate << ")\n\n";
  out << std::left << std::setw(static_cast<int>(width)) << "value"
      << std::right << std::setw(11) << "precision" << std::setw(11) << "recall"
      << std::setw(11) << "f1" << "\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& m = report.per_value[i];
    out << std::left << std::setw(static_cast<int>(width)) << labels[i]
        << std::right << std::setw(11) << Fixed(m.precision) << std::setw(11)
        << Fixed(m.recall) << std::setw(11) << Fixed(m.f1) << "\n";
  }
  out << "\nconfusion (rows true, columns predicted)\n";
  out << std::setw(static_cast<int>(width)) << "";
  for (const auto& l : labels) out << std::setw(static_cast<int>(width) + 2) << l;
  out << "\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out << std::left << std::setw(static_cast<int>(width)) << labels[i] << std::right;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      out << std::setw(static_cast<int>(width) + 2) << report.confusion.at(i, j);
    }
    out << "\n";
  }
  return out.str();
}

GroundTruth ReadGroundTruth(const std::string& path) {
  std::istringstream in(ReadFile(path));
  std::string line;
  if (!std::getline(in, line) || (line != "class_id,value" && line != "class_id,value\r")) {
    Bad(path + ": header must be 'class_id,value'");
  }
  GroundTruth truth;
  for (std::size_t n = 2; std::getline(in, line); ++n) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(n);
    const auto comma = line.find(',');
    if (comma == std::string::npos || comma + 1 == line.size()) {
      Bad(where + ": expected 'class_id,value'");
    }
    std::size_t id = 0;
    auto [end, ec] = std::from_chars(line.data(), line.data() + comma, id);
    if (ec != std::errc() || end != line.data() + comma) {
      Bad(where + ": bad class id");
    }
    if (!truth.emplace(id, line.substr(comma + 1)).second) {
      Bad(where + ": duplicate class id " + std::to_string(id));
    }
  }
  return truth;
}

void WriteGroundTruth(const std::string& path, const GroundTruth& truth) {
  std::string out = "class_id,value\n";
  for (const auto& [id, value] : truth) {
    out += std::to_string(id) + "," + value + "\n";
  }
  WriteFile(path, out);
}

Json ScenarioConfigToJson(const ScenarioConfig& c) {
  Json doc;
  doc["num_classes"] = c.num_classes;
  doc["attribute"] = AttributeToJson(c.attribute);
  doc["mu"] = c.mu;
  doc["sigma"] = c.sigma;
  doc["sigma_c"] = c.sigma_c;
  doc["base_std"] = c.base_std;
  doc["num_tuples"] = c.num_tuples;
  doc["seed"] = c.seed;
  doc["filter_margin"] = c.filter_margin;
  doc["filter_noise"] = c.filter_noise;
  return doc;
}

ScenarioConfig ScenarioConfigFromJson(const Json& doc) {
  const std::string where = "scenario config";
  if (!doc.is_object()) Bad("scenario config must be an object");
  ScenarioConfig c;
  c.num_classes = RequireCount(doc, "num_classes", where);
  c.attribute = AttributeFromJson(Require(doc, "attribute", where));
  c.mu = RequireNumber(doc, "mu", where);
  c.sigma = RequireNumber(doc, "sigma", where);
  c.sigma_c = RequireNumber(doc, "sigma_c", where);
  c.base_std = RequireNumber(doc, "base_std", where);
  c.num_tuples = RequireCount(doc, "num_tuples", where);
  const Json& seed = Require(doc, "seed", where);
  if (!seed.is_number_unsigned()) Bad("scenario config: 'seed' must be a nonnegative integer");
  c.seed = seed.get<std::uint64_t>();
  if (doc.contains("filter_margin")) c.filter_margin = RequireNumber(doc, "filter_margin", where);
  if (doc.contains("filter_noise")) c.filter_noise = RequireNumber(doc, "filter_noise", where);
  return c;
}

ScenarioConfig ReadScenarioConfig(const std::string& path) {
  return ScenarioConfigFromJson(ReadJson(path));
}

}  // namespace caia::io
