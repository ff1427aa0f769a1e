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

#ifndef CAIA_FILTER_H_
#define CAIA_FILTER_H_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "caia/attack.h"
#include "caia/attribute_space.h"

namespace caia {

// Softmax vectors of length k must sum to one within this tolerance.
inline constexpr double kProbabilitySumTolerance = 1e-6;

// Confidence threshold used for all reported attacks.
inline constexpr double kDefaultFilterThreshold = 0.6;

struct CandidateTuple {
  std::string id;
  std::map<std::string, std::string> images;
  // value -> attribute classifier softmax over the space, for that image.
  std::map<std::string, std::vector<double>> scores;
};

enum class FilterFailure { kWrongArgmax, kBelowThreshold, kMissingScore };

std::string_view FilterFailureName(FilterFailure failure);

struct FilterDecision {
  struct Failure {
    std::string value;
    FilterFailure reason;
    bool operator==(const Failure&) const = default;
  };
  std::string tuple_id;
  bool accepted = false;
  std::vector<Failure> failures;
};

// Throws kMalformedScore for a vector of the wrong length, with entries
// outside [0, 1] or NaN, or whose sum is off by more than the tolerance.
void CheckProbabilityVector(std::span<const double> probs, std::size_t k,
                            const std::string& context);

// A tuple passes when, for every value z, the classifier's argmax on the image
// for z is z alone and its probability is at least `tau`. A shared maximum
// counts as a wrong argmax.
FilterDecision FilterTuple(const CandidateTuple& candidate, double tau,
                           const AttributeSpace& space);

enum class FilterMode {
  kThreshold,
  // Accept the first `target_count` candidates without looking at scores.
  kBypass,
};

struct AttackSetBuild {
  std::vector<AttackTuple> accepted;
  // One per consumed candidate, in stream order.
  std::vector<FilterDecision> decisions;
  bool under_target = false;
};

// Consumes candidates in order until `target_count` are accepted or the
// stream ends. Throws kEmptyAttackSet when nothing was accepted and
// kConfiguration on tau outside [0, 1] or target_count == 0.
AttackSetBuild BuildAttackSet(std::span<const CandidateTuple> candidates,
                              double tau, std::size_t target_count,
                              const AttributeSpace& space,
                              FilterMode mode = FilterMode::kThreshold);

}  // namespace caia

#endif  // CAIA_FILTER_H_
