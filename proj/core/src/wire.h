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

// Shared pieces of the oracle HTTP protocol. Internal to the core library.

#ifndef CAIA_SRC_WIRE_H_
#define CAIA_SRC_WIRE_H_

#include <optional>
#include <string>
#include <string_view>

namespace caia::wire {

inline constexpr const char* kMetadataPath = "/v1/metadata";
inline constexpr const char* kLogitsPath = "/v1/logits";
inline constexpr const char* kAttributeScoresPath = "/v1/attribute_scores";
inline constexpr const char* kJsonContentType = "application/json";

// Standard alphabet with padding.
std::string Base64Encode(std::string_view bytes);
std::optional<std::string> Base64Decode(std::string_view text);

// {"error": message}
std::string ErrorBody(const std::string& message);

}  // namespace caia::wire

#endif  // CAIA_SRC_WIRE_H_
