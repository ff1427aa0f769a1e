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

#include "caia/attack.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string_view>

#include "caia/errors.h"

namespace caia {

void ValidateAttackSet(std::span<const AttackTuple> tuples,
                       const AttributeSpace& space) {
  std::set<std::string_view> ids;
  for (const auto& t : tuples) {
    if (t.id.empty()) {
      throw Error(ErrorKind::kMalformedTuple, "tuple with empty id");
    }
    if (!ids.insert(t.id).second) {
      throw Error(ErrorKind::kMalformedTuple, "duplicate tuple id '" + t.id + "'");
    }
    for (const auto& v : space.values()) {
      if (!t.images.contains(v)) {
        throw Error(ErrorKind::kMalformedTuple,
                    "tuple '" + t.id + "' has no image for value '" + v + "'");
      }
    }
    if (t.images.size() != space.size()) {
      for (const auto& [v, ref] : t.images) {
        if (!space.IndexOf(v)) {
          throw Error(ErrorKind::kMalformedTuple,
                      "tuple '" + t.id + "' has an image for unknown value '" +
                          v + "'");
        }
      }
    }
  }
}

void RelativeAdvantageInto(std::span<const double> logits, std::span<double> out) {
  if (logits.size() != out.size() || logits.size() < 2) {
    throw Error(ErrorKind::kMalformedTuple,
                "relative advantage needs k >= 2 logits and a matching output");
  }
  std::size_t best = 0;
  double top = logits[0];
  double runner_up = -std::numeric_limits<double>::infinity();
  for (std::size_t z = 0; z < logits.size(); ++z) {
    if (!std::isfinite(logits[z])) {
      throw Error(ErrorKind::kMalformedTuple,
                  "non-finite logit at value index " + std::to_string(z));
    }
    if (z == 0) continue;
    if (logits[z] > top) {
      runner_up = top;
      top = logits[z];
      best = z;
    } else if (logits[z] > runner_up) {
      // Also taken when logits[z] == top: a shared maximum makes the gap 0.
      runner_up = logits[z];
    }
  }
  std::fill(out.begin(), out.end(), 0.0);
  out[best] = top - runner_up;
}

AdvantageVector RelativeAdvantage(
    const std::map<std::string, double>& logits_by_value,
    const AttributeSpace& space) {
  std::vector<double> logits(space.size());
  for (std::size_t z = 0; z < space.size(); ++z) {
    auto it = logits_by_value.find(space.value(z));
    if (it == logits_by_value.end()) {
      throw Error(ErrorKind::kMalformedTuple,
                  "missing logit for value '" + space.value(z) + "'");
    }
    if (!std::isfinite(it->second)) {
      throw Error(ErrorKind::kMalformedTuple,
                  "non-finite logit for value '" + space.value(z) + "'");
    }
    logits[z] = it->second;
  }
  if (logits_by_value.size() != space.size()) {
    for (const auto& [v, x] : logits_by_value) {
      if (!space.IndexOf(v)) {
        throw Error(ErrorKind::kMalformedTuple,
                    "logit for unknown value '" + v + "'");
      }
    }
  }
  AdvantageVector out(space.size());
  RelativeAdvantageInto(logits, out);
  return out;
}

AdvantageTable::AdvantageTable(std::size_t num_classes, std::size_t num_values)
    : num_classes_(num_classes),
      num_values_(num_values),
      totals_(num_classes * num_values, 0.0) {}

void AdvantageTable::Accumulate(std::size_t class_id,
                                std::span<const double> advantage) {
  if (class_id >= num_classes_) {
    throw Error(ErrorKind::kIndex, "class " + std::to_string(class_id) +
                                       " out of range for " +
                                       std::to_string(num_classes_) + " classes");
  }
  if (advantage.size() != num_values_) {
    throw Error(ErrorKind::kMalformedTuple,
                "advantage vector of length " + std::to_string(advantage.size()) +
                    ", expected " + std::to_string(num_values_));
  }
  double* row = totals_.data() + class_id * num_values_;
  for (std::size_t z = 0; z < num_values_; ++z) row[z] += advantage[z];
}

std::span<const double> AdvantageTable::row(std::size_t class_id) const {
  if (class_id >= num_classes_) {
    throw Error(ErrorKind::kIndex, "class " + std::to_string(class_id) +
                                       " out of range");
  }
  return std::span<const double>(totals_).subspan(class_id * num_values_,
                                                  num_values_);
}

std::vector<ClassPrediction> Predict(const AdvantageTable& table,
                                     const AttributeSpace& space) {
  if (table.tuples_seen() == 0) {
    throw Error(ErrorKind::kEmptyAttackSet, "no attack tuple was accumulated");
  }
  if (table.num_values() != space.size()) {
    throw Error(ErrorKind::kConfiguration,
                "advantage table width does not match the attribute space");
  }
  std::vector<ClassPrediction> out;
  out.reserve(table.num_classes());
  for (std::size_t y = 0; y < table.num_classes(); ++y) {
    auto totals = table.row(y);
    std::size_t best = 0;
    std::size_t at_max = 1;
    for (std::size_t z = 1; z < totals.size(); ++z) {
      if (totals[z] > totals[best]) {
        best = z;
        at_max = 1;
      } else if (totals[z] == totals[best]) {
        ++at_max;
      }
    }
    ClassPrediction p;
    p.class_id = y;
    p.predicted_index = best;
    p.predicted_value = space.value(best);
    p.advantage_totals.assign(totals.begin(), totals.end());
    p.tie = at_max > 1;
    out.push_back(std::move(p));
  }
  return out;
}

void AccumulateTuple(const TupleLogits& rows, AdvantageTable& table) {
  const std::size_t k = table.num_values();
  if (rows.size() != k) {
    throw Error(ErrorKind::kMalformedTuple,
                "tuple has " + std::to_string(rows.size()) + " images, expected " +
                    std::to_string(k));
  }
  for (const auto& r : rows) {
    if (r.size() != table.num_classes()) {
      throw Error(ErrorKind::kProtocol, "logit row length does not match |Y|");
    }
  }
  std::vector<double> logits(k);
  std::vector<double> advantage(k);
  for (std::size_t y = 0; y < table.num_classes(); ++y) {
    for (std::size_t z = 0; z < k; ++z) logits[z] = rows[z][y];
    RelativeAdvantageInto(logits, advantage);
    table.Accumulate(y, advantage);
  }
  table.CountTuple();
}

AttackResult RunAttack(std::span<const AttackTuple> attack_set,
                       LogitSource& source, const AttributeSpace& space,
                       const AttackOptions& options) {
  if (attack_set.empty()) {
    throw Error(ErrorKind::kEmptyAttackSet, "attack set is empty");
  }
  ValidateAttackSet(attack_set, space);

  std::vector<std::size_t> order(attack_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return attack_set[a].id < attack_set[b].id;
  });
  if (options.sample_limit) {
    const std::size_t limit = *options.sample_limit;
    if (limit < 1 || limit > attack_set.size()) {
      throw Error(ErrorKind::kConfiguration,
                  "sample limit " + std::to_string(limit) + " outside [1, " +
                      std::to_string(attack_set.size()) + "]");
    }
    order.resize(limit);
  }

  const std::size_t k = space.size();
  std::vector<LogitRequest> requests;
  requests.reserve(order.size() * k);
  for (std::size_t i : order) {
    const auto& t = attack_set[i];
    for (const auto& v : space.values()) {
      requests.push_back({t.id, v, t.images.at(v)});
    }
  }

  const std::size_t num_classes = source.num_classes();
  if (num_classes < 1) {
    throw Error(ErrorKind::kProtocol, "oracle reports no classes");
  }
  FetchResult fetched = source.Fetch(requests);
  if (fetched.rows.size() != requests.size()) {
    throw Error(ErrorKind::kProtocol, "provider returned " +
                                          std::to_string(fetched.rows.size()) +
                                          " rows for " +
                                          std::to_string(requests.size()) +
                                          " requests");
  }

  AttackResult result{AdvantageTable(num_classes, k), {}, {}, {}};
  TupleLogits rows(k);
  for (std::size_t t = 0; t < order.size(); ++t) {
    const auto& tuple = attack_set[order[t]];
    std::string missing;
    for (std::size_t z = 0; z < k; ++z) {
      const auto& row = fetched.rows[t * k + z];
      if (!row) {
        if (!missing.empty()) missing += ", ";
        missing += space.value(z);
        continue;
      }
      CheckLogitRow(*row, num_classes, tuple.id + "/" + space.value(z));
      rows[z] = *row;
    }
    if (!missing.empty()) {
      result.skipped.push_back({tuple.id, "no logits for " + missing});
      continue;
    }
    AccumulateTuple(rows, result.table);
    result.used_tuple_ids.push_back(tuple.id);
  }
  if (result.table.tuples_seen() == 0) {
    std::string why = "all " + std::to_string(order.size()) + " tuples skipped";
    if (!fetched.failures.empty()) {
      why += std::string(" (") + fetched.failures.front().what() + ")";
    }
    throw Error(ErrorKind::kEmptyAttackSet, why);
  }
  result.predictions = Predict(result.table, space);
  return result;
}

}  // namespace caia
