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

// JSON manifests, predictions, reports and scenario configs.
//
// Every reader throws caia::Error: kIo for unreadable files, kConfiguration
// for documents that do not match their format.

#ifndef CAIA_IO_H_
#define CAIA_IO_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "caia/attack.h"
#include "caia/attribute_space.h"
#include "caia/evaluation.h"
#include "caia/filter.h"
#include "caia/simulator.h"

namespace caia::io {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kAttackSetFormat = "caia-attackset/1";
inline constexpr std::string_view kPredictionsFormat = "caia-predictions/1";
inline constexpr std::string_view kReportFormat = "caia-report/1";
inline constexpr std::string_view kDecisionsFormat = "caia-decisions/1";
inline constexpr std::string_view kCurveFormat = "caia-ablation/1";

std::string ReadFile(const std::string& path);
// Writes atomically enough for our purposes: truncate + write, kIo on error.
void WriteFile(const std::string& path, std::string_view contents);
Json ReadJson(const std::string& path);
void WriteJson(const std::string& path, const Json& doc);

Json AttributeToJson(const AttributeSpace& space);
AttributeSpace AttributeFromJson(const Json& doc);

// Edit prompts shipped as data: {"prefix": str, "attributes": {name:
// {value: suffix}}}. Returns the space with full prompts attached when the
// file knows the attribute, the space unchanged otherwise.
AttributeSpace AttachPrompts(const AttributeSpace& space,
                             const std::string& prompts_path);

// Attack-set / candidate manifests share one format; scores are optional per
// tuple for attack sets and required by the filter.
struct Manifest {
  AttributeSpace attribute;
  std::vector<CandidateTuple> tuples;
};

Manifest ReadManifest(const std::string& path);
std::vector<AttackTuple> ToAttackTuples(const Manifest& manifest);
Json AttackSetToJson(const AttributeSpace& space,
                     std::span<const AttackTuple> tuples, const Json& config);

Json DecisionsToJson(std::span<const FilterDecision> decisions,
                     const Json& config);

struct Predictions {
  AttributeSpace attribute;
  std::vector<ClassPrediction> classes;
};

Json PredictionsToJson(const AttributeSpace& space,
                       std::span<const ClassPrediction> predictions,
                       const Json& config);
Predictions PredictionsFromJson(const Json& doc);

Json ReportToJson(const MetricsReport& report, const Json& config);
MetricsReport ReportFromJson(const Json& doc);
// Aligned-column text rendering of a report.
std::string ReportTable(const MetricsReport& report);

// CSV with header `class_id,value`.
GroundTruth ReadGroundTruth(const std::string& path);
void WriteGroundTruth(const std::string& path, const GroundTruth& truth);

Json ScenarioConfigToJson(const ScenarioConfig& config);
ScenarioConfig ScenarioConfigFromJson(const Json& doc);
ScenarioConfig ReadScenarioConfig(const std::string& path);

}  // namespace caia::io

#endif  // CAIA_IO_H_
