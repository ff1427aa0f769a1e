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

// Class attribute inference from black-box logits.
//
// Every attack tuple holds k images of the same base picture, one per
// attribute value. For each target class the tuple contributes a relative
// advantage vector: the image with the highest logit for that class receives
// the gap to the runner-up, every other image receives zero. Summing these
// vectors over the attack set and taking the argmax predicts the class's
// attribute value.

#ifndef CAIA_ATTACK_H_
#define CAIA_ATTACK_H_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "caia/attribute_space.h"
#include "caia/logit_source.h"

namespace caia {

// Indexed by attribute value position. At most one entry is nonzero and no
// entry is negative.
using AdvantageVector = std::vector<double>;

struct AttackTuple {
  std::string id;
  // value -> image reference, exactly one per attribute value.
  std::map<std::string, std::string> images;
  // value -> attribute classifier probabilities over the space, if known.
  std::optional<std::map<std::string, std::vector<double>>> filter_scores;
};

// Throws kMalformedTuple on a tuple whose images do not cover the space
// exactly, and on duplicate tuple ids.
void ValidateAttackSet(std::span<const AttackTuple> tuples,
                       const AttributeSpace& space);

// Relative advantage of one tuple for one class, keyed by value label.
// Throws kMalformedTuple naming the value that is missing or not finite.
AdvantageVector RelativeAdvantage(
    const std::map<std::string, double>& logits_by_value,
    const AttributeSpace& space);

// Index form of the above; `logits[z]` is the class logit of the image for
// value z. `out` must have the same length and is overwritten. A tied maximum
// leaves `out` all zero.
void RelativeAdvantageInto(std::span<const double> logits, std::span<double> out);

// Per-class running sums of advantage vectors.
class AdvantageTable {
 public:
  AdvantageTable(std::size_t num_classes, std::size_t num_values);

  std::size_t num_classes() const { return num_classes_; }
  std::size_t num_values() const { return num_values_; }
  std::size_t tuples_seen() const { return tuples_seen_; }

  // Elementwise add into the row for `class_id`. Throws kIndex when the class
  // is out of range and kMalformedTuple on a length mismatch.
  void Accumulate(std::size_t class_id, std::span<const double> advantage);
  void CountTuple() { ++tuples_seen_; }

  std::span<const double> row(std::size_t class_id) const;
  const std::vector<double>& totals() const { return totals_; }

  bool operator==(const AdvantageTable&) const = default;

 private:
  std::size_t num_classes_;
  std::size_t num_values_;
  std::size_t tuples_seen_ = 0;
  std::vector<double> totals_;
};

struct ClassPrediction {
  std::size_t class_id = 0;
  std::string predicted_value;
  std::size_t predicted_index = 0;
  std::vector<double> advantage_totals;
  // The maximum total is shared by two or more values; the lowest index won.
  bool tie = false;

  bool operator==(const ClassPrediction&) const = default;
};

// Argmax per class. Throws kEmptyAttackSet when no tuple was accumulated.
std::vector<ClassPrediction> Predict(const AdvantageTable& table,
                                     const AttributeSpace& space);

// Logits of the k images of one tuple: `rows[z]` is the full class vector for
// the image depicting value z.
using TupleLogits = std::vector<std::span<const double>>;

// Adds the advantage of every class for one tuple. One logit vector per image
// scores all classes.
void AccumulateTuple(const TupleLogits& rows, AdvantageTable& table);

struct SkippedTuple {
  std::string tuple_id;
  std::string reason;
};

struct AttackOptions {
  // Use only the first N tuples in ascending id order.
  std::optional<std::size_t> sample_limit;
};

struct AttackResult {
  AdvantageTable table;
  std::vector<ClassPrediction> predictions;
  std::vector<std::string> used_tuple_ids;
  std::vector<SkippedTuple> skipped;
};

// Queries every image of the selected tuples once and reduces in ascending
// tuple id order, so the result does not depend on how the source schedules
// its requests. Tuples with any missing row are dropped whole.
AttackResult RunAttack(std::span<const AttackTuple> attack_set,
                       LogitSource& source, const AttributeSpace& space,
                       const AttackOptions& options = {});

}  // namespace caia

#endif  // CAIA_ATTACK_H_
