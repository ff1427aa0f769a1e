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

#include "caia/attribute_space.h"

#include <set>
#include <utility>

#include "caia/errors.h"

namespace caia {

AttributeSpace::AttributeSpace(std::string name, std::vector<std::string> values,
                               std::map<std::string, std::string> prompts)
    : name_(std::move(name)),
      values_(std::move(values)),
      prompts_(std::move(prompts)) {
  if (values_.size() < 2) {
    throw Error(ErrorKind::kConfiguration,
                "attribute '" + name_ + "' needs at least two values");
  }
  std::set<std::string_view> seen;
  for (const auto& v : values_) {
    if (v.empty()) {
      throw Error(ErrorKind::kConfiguration,
                  "attribute '" + name_ + "' has an empty value label");
    }
    if (!seen.insert(v).second) {
      throw Error(ErrorKind::kConfiguration,
                  "attribute '" + name_ + "' repeats value '" + v + "'");
    }
  }
  for (const auto& [value, prompt] : prompts_) {
    if (!seen.contains(value)) {
      throw Error(ErrorKind::kConfiguration,
                  "prompt given for unknown value '" + value + "'");
    }
  }
}

std::optional<std::size_t> AttributeSpace::IndexOf(std::string_view value) const {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] == value) return i;
  }
  return std::nullopt;
}

std::size_t AttributeSpace::IndexOrThrow(std::string_view value) const {
  if (auto index = IndexOf(value)) return *index;
  throw Error(ErrorKind::kDomain, "value '" + std::string(value) +
                                      "' is not in attribute '" + name_ + "'");
}

bool AttributeSpace::SameSpace(const AttributeSpace& other) const {
  return name_ == other.name_ && values_ == other.values_;
}

}  // namespace caia
