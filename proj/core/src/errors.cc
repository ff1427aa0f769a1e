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

#include "caia/errors.h"

namespace caia {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfiguration:
      return "configuration error";
    case ErrorKind::kMalformedTuple:
      return "malformed tuple";
    case ErrorKind::kMalformedScore:
      return "malformed score";
    case ErrorKind::kIndex:
      return "index error";
    case ErrorKind::kEmptyAttackSet:
      return "empty attack set";
    case ErrorKind::kProtocol:
      return "protocol error";
    case ErrorKind::kTransport:
      return "transport error";
    case ErrorKind::kMissingRecord:
      return "missing record";
    case ErrorKind::kDomain:
      return "domain error";
    case ErrorKind::kEvaluation:
      return "evaluation error";
    case ErrorKind::kDegenerateSample:
      return "degenerate sample";
    case ErrorKind::kShape:
      return "shape error";
    case ErrorKind::kMalformedMask:
      return "malformed mask";
    case ErrorKind::kIo:
      return "i/o error";
  }
  return "error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(ErrorKindName(kind)) + ": " + message),
      kind_(kind) {}

}  // namespace caia
