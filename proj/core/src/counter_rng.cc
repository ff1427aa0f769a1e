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

#include "caia/counter_rng.h"

#include <cmath>
#include <numbers>
#include <numeric>
#include <utility>

namespace caia::rng {

double Uniform(std::uint64_t key) {
  const std::uint64_t bits = Mix64(key) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double StandardNormal(std::uint64_t key) {
  const double u1 = Uniform(key);
  const double u2 = Uniform(key ^ 0x5851f42d4c957f2dULL);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Below(std::uint64_t key, std::uint64_t bound) {
  // Multiply-shift; bias is below 2^-64 * bound.
  const unsigned __int128 wide =
      static_cast<unsigned __int128>(Mix64(key)) * bound;
  return static_cast<std::uint64_t>(wide >> 64);
}

std::vector<std::size_t> Permutation(std::size_t n, std::uint64_t key) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = Below(Key({key, i}), i);
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

}  // namespace caia::rng
