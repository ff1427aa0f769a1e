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

#ifndef CAIA_LOGIT_SOURCE_H_
#define CAIA_LOGIT_SOURCE_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "caia/errors.h"

namespace caia {

// One attack image to score: the (tuple, value) key plus an opaque image
// reference (path or URI).
struct LogitRequest {
  std::string tuple_id;
  std::string value;
  std::string image;
};

// Rows aligned to request keys, `num_classes` pre-softmax logits per row.
class LogitBatch {
 public:
  LogitBatch(std::size_t num_classes, std::vector<LogitRequest> keys,
             std::vector<double> values);

  std::size_t num_classes() const { return num_classes_; }
  std::size_t size() const { return keys_.size(); }
  const LogitRequest& key(std::size_t i) const { return keys_.at(i); }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values_).subspan(i * num_classes_,
                                                     num_classes_);
  }
  const std::vector<double>& values() const { return values_; }

 private:
  std::size_t num_classes_;
  std::vector<LogitRequest> keys_;
  std::vector<double> values_;
};

// Per-request outcome of a provider call. Rows a provider could not produce
// (missing file record, batch that exhausted its retries) are nullopt and the
// reason is listed in `failures`.
struct FetchResult {
  std::vector<std::optional<std::vector<double>>> rows;
  std::vector<Error> failures;
};

// Black-box access to a target model's pre-softmax logits.
//
// Implementations must return logits, never softmax outputs. Nothing in the
// attack can detect a provider that violates this; the relative advantage
// would silently be computed on probabilities instead.
//
// Implementations are safe for concurrent use and stateless per request:
// the same key always yields the same row.
class LogitSource {
 public:
  virtual ~LogitSource() = default;

  // |Y|, the number of target classes.
  virtual std::size_t num_classes() = 0;

  // One entry per request, in request order. Rows of the wrong length and
  // non-finite entries are protocol errors and throw instead.
  virtual FetchResult Fetch(std::span<const LogitRequest> requests) = 0;
};

// Strict fetch: throws the first recorded failure if any row is missing.
LogitBatch FetchLogits(LogitSource& source,
                       std::span<const LogitRequest> requests);

// Throws kProtocol when `row` is not `num_classes` finite numbers.
void CheckLogitRow(std::span<const double> row, std::size_t num_classes,
                   const std::string& context);

}  // namespace caia

#endif  // CAIA_LOGIT_SOURCE_H_
