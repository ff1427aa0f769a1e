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

#ifndef CAIA_EVALUATION_H_
#define CAIA_EVALUATION_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "caia/attack.h"
#include "caia/attribute_space.h"
#include "caia/logit_source.h"

namespace caia {

// class id -> true attribute value.
using GroundTruth = std::map<std::size_t, std::string>;

// Rows are true values, columns predicted values, both in attribute order.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::vector<std::string> labels);

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }

  std::uint64_t at(std::size_t truth, std::size_t predicted) const {
    return counts_.at(truth * labels_.size() + predicted);
  }
  void Add(std::size_t truth, std::size_t predicted, std::uint64_t n = 1);

  std::uint64_t total() const;
  std::uint64_t trace() const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::vector<std::string> labels_;
  std::vector<std::uint64_t> counts_;
};

// Undefined components (no predicted positives for precision, no true
// members for recall) are nullopt rather than 0.
struct ValueMetrics {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
};

struct MetricsReport {
  double accuracy = 0.0;
  double accuracy_std = 0.0;
  std::vector<ValueMetrics> per_value;  // attribute order
  ConfusionMatrix confusion{{}};
  std::size_t runs = 1;
  double tie_rate = 0.0;
  // Only for aggregated reports: metrics of the summed confusion matrix.
  std::optional<std::vector<ValueMetrics>> pooled;
};

// Throws kEvaluation listing the class ids absent from `truth` and for truth
// values outside the space.
ConfusionMatrix Confusion(std::span<const ClassPrediction> predictions,
                          const GroundTruth& truth, const AttributeSpace& space);

// One-vs-rest metrics. Throws kEvaluation on an empty matrix.
MetricsReport Metrics(const ConfusionMatrix& confusion);

// Confusion + metrics, plus the share of tie-flagged predictions.
MetricsReport Evaluate(std::span<const ClassPrediction> predictions,
                       const GroundTruth& truth, const AttributeSpace& space);

// Mean of every per-run metric (over the runs where it is defined), population
// std of accuracy, summed confusion. Throws kEvaluation on an empty list or
// reports over different label sets.
MetricsReport AggregateRuns(std::span<const MetricsReport> reports);

// Seeded shuffle, then position i goes to subset i mod m. Throws
// kConfiguration when m == 0 or m exceeds the set size.
std::vector<std::vector<AttackTuple>> PartitionSubsets(
    std::span<const AttackTuple> attack_set, std::size_t m, std::uint64_t seed);

struct AblationPoint {
  std::size_t size = 0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // population std over repeats
  // False when repeats * size exceeded the set and subsets could overlap.
  bool disjoint = true;
  std::vector<double> accuracies;  // by repeat index
};

// For every size, runs the attack on `repeats` seeded subsets and scores it.
// Each image is queried at most once across the whole ablation.
std::vector<AblationPoint> Ablate(std::span<const AttackTuple> attack_set,
                                  LogitSource& source,
                                  const AttributeSpace& space,
                                  const GroundTruth& truth,
                                  std::span<const std::size_t> sizes,
                                  std::size_t repeats, std::uint64_t seed);

}  // namespace caia

#endif  // CAIA_EVALUATION_H_
