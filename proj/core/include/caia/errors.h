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

#ifndef CAIA_ERRORS_H_
#define CAIA_ERRORS_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace caia {

enum class ErrorKind {
  kConfiguration,
  kMalformedTuple,
  kMalformedScore,
  kIndex,
  kEmptyAttackSet,
  kProtocol,
  kTransport,
  kMissingRecord,
  kDomain,
  kEvaluation,
  kDegenerateSample,
  kShape,
  kMalformedMask,
  kIo,
};

std::string_view ErrorKindName(ErrorKind kind);

// Every failure raised by the library. The kind drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace caia

#endif  // CAIA_ERRORS_H_
