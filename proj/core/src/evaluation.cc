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

#include "caia/evaluation.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "caia/counter_rng.h"
#include "caia/errors.h"
#include "caia/oracle.h"

namespace caia {
namespace {

// Mean and population std, shifted by the first sample so identical inputs
// reproduce themselves exactly.
std::pair<double, double> MeanStd(std::span<const double> xs) {
  const double shift = xs.front();
  double sum = 0.0;
  for (double x : xs) sum += x - shift;
  const double mean_dev = sum / static_cast<double>(xs.size());
  double sq = 0.0;
  for (double x : xs) {
    const double d = (x - shift) - mean_dev;
    sq += d * d;
  }
  return {shift + mean_dev, std::sqrt(sq / static_cast<double>(xs.size()))};
}

std::optional<double> MeanDefined(std::span<const std::optional<double>> xs) {
  std::vector<double> defined;
  for (const auto& x : xs) {
    if (x) defined.push_back(*x);
  }
  if (defined.empty()) return std::nullopt;
  return MeanStd(defined).first;
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> labels)
    : labels_(std::move(labels)), counts_(labels_.size() * labels_.size(), 0) {}

void ConfusionMatrix::Add(std::size_t truth, std::size_t predicted,
                          std::uint64_t n) {
  if (truth >= labels_.size() || predicted >= labels_.size()) {
    throw Error(ErrorKind::kIndex, "confusion index out of range");
  }
  counts_[truth * labels_.size() + predicted] += n;
}

std::uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t t = 0;
  for (std::size_t i = 0; i < labels_.size(); ++i) t += at(i, i);
  return t;
}

ConfusionMatrix Confusion(std::span<const ClassPrediction> predictions,
                          const GroundTruth& truth, const AttributeSpace& space) {
  ConfusionMatrix m(std::vector<std::string>(space.values().begin(),
                                             space.values().end()));
  std::string missing;
  for (const auto& p : predictions) {
    auto it = truth.find(p.class_id);
    if (it == truth.end()) {
      missing += (missing.empty() ? "" : ", ") + std::to_string(p.class_id);
      continue;
    }
    auto true_index = space.IndexOf(it->second);
    if (!true_index) {
      throw Error(ErrorKind::kEvaluation, "class " + std::to_string(p.class_id) +
                                              " has ground truth '" + it->second +
                                              "' outside the attribute space");
    }
    auto predicted_index = space.IndexOf(p.predicted_value);
    if (!predicted_index) {
      throw Error(ErrorKind::kEvaluation,
                  "class " + std::to_string(p.class_id) + " predicted '" +
                      p.predicted_value + "' outside the attribute space");
    }
    m.Add(*true_index, *predicted_index);
  }
  if (!missing.empty()) {
    throw Error(ErrorKind::kEvaluation, "no ground truth for classes " + missing);
  }
  return m;
}

MetricsReport Metrics(const ConfusionMatrix& confusion) {
  const std::uint64_t total = confusion.total();
  if (confusion.size() == 0 || total == 0) {
    throw Error(ErrorKind::kEvaluation, "empty confusion matrix");
  }
  MetricsReport r;
  r.confusion = confusion;
  r.accuracy = static_cast<double>(confusion.trace()) / static_cast<double>(total);
  const std::size_t k = confusion.size();
  r.per_value.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::uint64_t row = 0, col = 0;
    for (std::size_t j = 0; j < k; ++j) {
      row += confusion.at(i, j);
      col += confusion.at(j, i);
    }
    const double tp = static_cast<double>(confusion.at(i, i));
    auto& v = r.per_value[i];
    if (col > 0) v.precision = tp / static_cast<double>(col);
    if (row > 0) v.recall = tp / static_cast<double>(row);
    if (v.precision && v.recall) {
      const double sum = *v.precision + *v.recall;
      v.f1 = sum == 0.0 ? 0.0 : 2.0 * *v.precision * *v.recall / sum;
    }
  }
  return r;
}

MetricsReport Evaluate(std::span<const ClassPrediction> predictions,
                       const GroundTruth& truth, const AttributeSpace& space) {
  MetricsReport r = Metrics(Confusion(predictions, truth, space));
  const auto ties = std::count_if(predictions.begin(), predictions.end(),
                                  [](const ClassPrediction& p) { return p.tie; });
  r.tie_rate = static_cast<double>(ties) / static_cast<double>(predictions.size());
  return r;
}

MetricsReport AggregateRuns(std::span<const MetricsReport> reports) {
  if (reports.empty()) {
    throw Error(ErrorKind::kEvaluation, "no reports to aggregate");
  }
  const auto& labels = reports.front().confusion.labels();
  for (const auto& r : reports) {
    if (r.confusion.labels() != labels || r.per_value.size() != labels.size()) {
      throw Error(ErrorKind::kEvaluation,
                  "reports are over different attribute spaces");
    }
  }
  if (reports.size() == 1) {
    MetricsReport r = reports.front();
    r.accuracy_std = 0.0;
    return r;
  }

  MetricsReport out;
  ConfusionMatrix pooled(labels);
  std::vector<double> accuracies, tie_rates;
  std::size_t runs = 0;
  for (const auto& r : reports) {
    accuracies.push_back(r.accuracy);
    tie_rates.push_back(r.tie_rate);
    runs += r.runs;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      for (std::size_t j = 0; j < labels.size(); ++j) {
        pooled.Add(i, j, r.confusion.at(i, j));
      }
    }
  }
  std::tie(out.accuracy, out.accuracy_std) = MeanStd(accuracies);
  out.tie_rate = MeanStd(tie_rates).first;
  out.runs = runs;
  out.per_value.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::vector<std::optional<double>> p, rc, f;
    for (const auto& r : reports) {
      p.push_back(r.per_value[i].precision);
      rc.push_back(r.per_value[i].recall);
      f.push_back(r.per_value[i].f1);
    }
    out.per_value[i] = {MeanDefined(p), MeanDefined(rc), MeanDefined(f)};
  }
  out.pooled = Metrics(pooled).per_value;
  out.confusion = std::move(pooled);
  return out;
}

std::vector<std::vector<AttackTuple>> PartitionSubsets(
    std::span<const AttackTuple> attack_set, std::size_t m, std::uint64_t seed) {
  if (m == 0 || m > attack_set.size()) {
    throw Error(ErrorKind::kConfiguration,
                "cannot split " + std::to_string(attack_set.size()) +
                    " tuples into " + std::to_string(m) + " subsets");
  }
  const auto perm = rng::Permutation(attack_set.size(), rng::Key({seed}));
  std::vector<std::vector<AttackTuple>> subsets(m);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    subsets[i % m].push_back(attack_set[perm[i]]);
  }
  return subsets;
}

std::vector<AblationPoint> Ablate(std::span<const AttackTuple> attack_set,
                                  LogitSource& source,
                                  const AttributeSpace& space,
                                  const GroundTruth& truth,
                                  std::span<const std::size_t> sizes,
                                  std::size_t repeats, std::uint64_t seed) {
  const std::size_t n = attack_set.size();
  if (sizes.empty() || repeats == 0) {
    throw Error(ErrorKind::kConfiguration, "ablation needs sizes and repeats >= 1");
  }
  for (std::size_t s : sizes) {
    if (s == 0 || s > n) {
      throw Error(ErrorKind::kConfiguration,
                  "ablation size " + std::to_string(s) + " outside [1, " +
                      std::to_string(n) + "]");
    }
  }

  CachingLogitSource cache(source);
  std::vector<AblationPoint> curve;
  for (std::size_t s : sizes) {
    AblationPoint point;
    point.size = s;
    point.disjoint = repeats * s <= n;
    std::vector<std::size_t> shared;
    if (point.disjoint) shared = rng::Permutation(n, rng::Key({seed, s}));
    for (std::size_t r = 0; r < repeats; ++r) {
      std::vector<AttackTuple> subset;
      subset.reserve(s);
      if (point.disjoint) {
        for (std::size_t i = r * s; i < (r + 1) * s; ++i) {
          subset.push_back(attack_set[shared[i]]);
        }
      } else {
        const auto perm = rng::Permutation(n, rng::Key({seed, s, r}));
        for (std::size_t i = 0; i < s; ++i) subset.push_back(attack_set[perm[i]]);
      }
      const AttackResult result = RunAttack(subset, cache, space);
      point.accuracies.push_back(
          Evaluate(result.predictions, truth, space).accuracy);
    }
    std::tie(point.mean_accuracy, point.std_accuracy) = MeanStd(point.accuracies);
    curve.push_back(std::move(point));
  }
  return curve;
}

}  // namespace caia
