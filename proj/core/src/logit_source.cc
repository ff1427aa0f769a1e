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

#include "caia/logit_source.h"

#include <cmath>
#include <utility>

namespace caia {

LogitBatch::LogitBatch(std::size_t num_classes, std::vector<LogitRequest> keys,
                       std::vector<double> values)
    : num_classes_(num_classes),
      keys_(std::move(keys)),
      values_(std::move(values)) {
  if (values_.size() != keys_.size() * num_classes_) {
    throw Error(ErrorKind::kProtocol, "logit batch has " +
                                          std::to_string(values_.size()) +
                                          " entries for " +
                                          std::to_string(keys_.size()) + " rows");
  }
}

void CheckLogitRow(std::span<const double> row, std::size_t num_classes,
                   const std::string& context) {
  if (row.size() != num_classes) {
    throw Error(ErrorKind::kProtocol,
                context + ": row has " + std::to_string(row.size()) +
                    " logits, oracle reports " + std::to_string(num_classes) +
                    " classes");
  }
  for (double v : row) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::kProtocol, context + ": non-finite logit");
    }
  }
}

LogitBatch FetchLogits(LogitSource& source,
                       std::span<const LogitRequest> requests) {
  if (requests.empty()) {
    throw Error(ErrorKind::kConfiguration, "no logit requests");
  }
  const std::size_t num_classes = source.num_classes();
  FetchResult result = source.Fetch(requests);
  if (!result.failures.empty()) throw result.failures.front();
  if (result.rows.size() != requests.size()) {
    throw Error(ErrorKind::kProtocol, "provider returned " +
                                          std::to_string(result.rows.size()) +
                                          " rows for " +
                                          std::to_string(requests.size()) +
                                          " requests");
  }
  std::vector<double> values;
  values.reserve(requests.size() * num_classes);
  for (std::size_t i = 0; i < requests.size(); ++i) {
    if (!result.rows[i]) {
      throw Error(ErrorKind::kMissingRecord,
                  requests[i].tuple_id + "/" + requests[i].value);
    }
    CheckLogitRow(*result.rows[i], num_classes,
                  requests[i].tuple_id + "/" + requests[i].value);
    values.insert(values.end(), result.rows[i]->begin(), result.rows[i]->end());
  }
  return LogitBatch(num_classes,
                    std::vector<LogitRequest>(requests.begin(), requests.end()),
                    std::move(values));
}

}  // namespace caia
