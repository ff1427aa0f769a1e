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

#include "caia/filter.h"

#include <cmath>

#include "caia/errors.h"

namespace caia {

std::string_view FilterFailureName(FilterFailure failure) {
  switch (failure) {
    case FilterFailure::kWrongArgmax:
      return "wrong-argmax";
    case FilterFailure::kBelowThreshold:
      return "below-threshold";
    case FilterFailure::kMissingScore:
      return "missing-score";
  }
  return "unknown";
}

void CheckProbabilityVector(std::span<const double> probs, std::size_t k,
                            const std::string& context) {
  if (probs.size() != k) {
    throw Error(ErrorKind::kMalformedScore,
                context + ": " + std::to_string(probs.size()) +
                    " probabilities, expected " + std::to_string(k));
  }
  double sum = 0.0;
  for (double p : probs) {
    if (std::isnan(p) || p < 0.0 || p > 1.0) {
      throw Error(ErrorKind::kMalformedScore,
                  context + ": probability outside [0, 1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
    throw Error(ErrorKind::kMalformedScore,
                context + ": probabilities sum to " + std::to_string(sum));
  }
}

FilterDecision FilterTuple(const CandidateTuple& candidate, double tau,
                           const AttributeSpace& space) {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw Error(ErrorKind::kConfiguration, "tau must lie in [0, 1]");
  }
  FilterDecision decision;
  decision.tuple_id = candidate.id;
  const std::size_t k = space.size();
  for (std::size_t z = 0; z < k; ++z) {
    const std::string& value = space.value(z);
    auto it = candidate.scores.find(value);
    if (it == candidate.scores.end()) {
      decision.failures.push_back({value, FilterFailure::kMissingScore});
      continue;
    }
    const auto& probs = it->second;
    CheckProbabilityVector(probs, k, candidate.id + "/" + value);

    std::size_t best = 0;
    bool shared = false;
    for (std::size_t j = 1; j < k; ++j) {
      if (probs[j] > probs[best]) {
        best = j;
        shared = false;
      } else if (probs[j] == probs[best]) {
        shared = true;
      }
    }
    if (best != z || shared) {
      decision.failures.push_back({value, FilterFailure::kWrongArgmax});
    } else if (probs[z] < tau) {
      decision.failures.push_back({value, FilterFailure::kBelowThreshold});
    }
  }
  decision.accepted = decision.failures.empty();
  return decision;
}

AttackSetBuild BuildAttackSet(std::span<const CandidateTuple> candidates,
                              double tau, std::size_t target_count,
                              const AttributeSpace& space, FilterMode mode) {
  if (target_count == 0) {
    throw Error(ErrorKind::kConfiguration, "target count must be at least 1");
  }
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw Error(ErrorKind::kConfiguration, "tau must lie in [0, 1]");
  }
  AttackSetBuild build;
  for (const auto& candidate : candidates) {
    if (build.accepted.size() >= target_count) break;
    FilterDecision decision;
    if (mode == FilterMode::kBypass) {
      decision.tuple_id = candidate.id;
      decision.accepted = true;
    } else {
      decision = FilterTuple(candidate, tau, space);
    }
    if (decision.accepted) {
      AttackTuple tuple{candidate.id, candidate.images, std::nullopt};
      if (!candidate.scores.empty()) tuple.filter_scores = candidate.scores;
      build.accepted.push_back(std::move(tuple));
    }
    build.decisions.push_back(std::move(decision));
  }
  if (build.accepted.empty()) {
    throw Error(ErrorKind::kEmptyAttackSet,
                "no candidate passed the filter (" +
                    std::to_string(build.decisions.size()) + " examined)");
  }
  ValidateAttackSet(build.accepted, space);
  build.under_target = build.accepted.size() < target_count;
  return build;
}

}  // namespace caia
