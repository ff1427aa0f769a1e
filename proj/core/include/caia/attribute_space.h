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

#ifndef CAIA_ATTRIBUTE_SPACE_H_
#define CAIA_ATTRIBUTE_SPACE_H_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace caia {

// The sensitive attribute under attack. The position of a value in
// `values()` is its index everywhere else in the library (advantage vectors,
// confusion rows, tie breaking).
class AttributeSpace {
 public:
  // Throws kConfiguration on fewer than two values, empty or duplicate labels.
  AttributeSpace(std::string name, std::vector<std::string> values,
                 std::map<std::string, std::string> prompts = {});

  const std::string& name() const { return name_; }
  std::span<const std::string> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  const std::string& value(std::size_t index) const { return values_.at(index); }

  std::optional<std::size_t> IndexOf(std::string_view value) const;
  // Throws kDomain when `value` is not part of the space.
  std::size_t IndexOrThrow(std::string_view value) const;

  // Edit-prompt metadata keyed by value. Never used by the attack itself.
  const std::map<std::string, std::string>& prompts() const { return prompts_; }

  // Same name and same ordered values. Prompts are metadata and ignored.
  bool SameSpace(const AttributeSpace& other) const;

 private:
  std::string name_;
  std::vector<std::string> values_;
  std::map<std::string, std::string> prompts_;
};

}  // namespace caia

#endif  // CAIA_ATTRIBUTE_SPACE_H_
