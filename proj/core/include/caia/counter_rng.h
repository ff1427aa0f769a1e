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

// Stateless random draws: every number is a pure function of a key, so
// results never depend on call order or thread interleaving.

#ifndef CAIA_COUNTER_RNG_H_
#define CAIA_COUNTER_RNG_H_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string_view>
#include <vector>

namespace caia::rng {

// splitmix64 finalizer.
constexpr std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// 64-bit FNV-1a.
constexpr std::uint64_t HashString(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t Key(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (std::uint64_t p : parts) h = Mix64(h ^ p);
  return h;
}

// Uniform in the open interval (0, 1).
double Uniform(std::uint64_t key);

// Standard normal via Box-Muller on two uniforms derived from `key`.
double StandardNormal(std::uint64_t key);

// Uniform in [0, bound).
std::uint64_t Below(std::uint64_t key, std::uint64_t bound);

// Fisher-Yates permutation of 0..n-1 driven by `key`.
std::vector<std::size_t> Permutation(std::size_t n, std::uint64_t key);

}  // namespace caia::rng

#endif  // CAIA_COUNTER_RNG_H_
