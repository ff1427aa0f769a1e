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

// Relative attribution: the share of a model's absolute pixel attribution
// that falls inside a segmentation region, averaged over images. Attribution
// maps and masks are produced elsewhere and only aggregated here.

#ifndef CAIA_ATTRIBUTION_H_
#define CAIA_ATTRIBUTION_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace caia {

inline constexpr std::string_view kGridFormat = "caia-grid/1";

// Row-major nonnegative grid, e.g. |integrated gradients| summed over
// channels. Callers take the absolute value of signed attributions.
struct FloatGrid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;

  double at(std::size_t row, std::size_t col) const {
    return values.at(row * width + col);
  }
};

struct MaskGrid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> inside;  // 0 or 1, row-major
  std::string label;
};

struct AttributionSample {
  std::string name;
  FloatGrid map;
  std::map<std::string, MaskGrid> masks;  // region label -> mask
};

struct RegionShare {
  double mean_share = 0.0;
  std::size_t samples = 0;
};

struct RelativeAttributionReport {
  std::map<std::string, RegionShare> regions;
};

// ||map * mask||_1 / ||map||_1. Throws kShape on a dimension mismatch and
// kDegenerateSample when the map has no mass or an invalid entry.
double RegionShareOf(const FloatGrid& map, const MaskGrid& mask,
                     std::string_view sample_name = {});

// Per region, the mean share over the samples that carry that region, summed
// in input order.
RelativeAttributionReport RelativeAttribution(
    std::span<const AttributionSample> samples);

// JSON header line {"format":"caia-grid/1","height":H,"width":W,
// "dtype":"f32le"}, then base64 of little-endian float32 values on line two.
FloatGrid ReadFloatGrid(const std::string& path);
void WriteFloatGrid(const std::string& path, const FloatGrid& grid);

// 8-bit grayscale PNG: 0 outside, 255 inside; anything else is kMalformedMask.
MaskGrid ReadMaskPng(const std::string& path, std::string label);
void WriteMaskPng(const std::string& path, const MaskGrid& mask);

}  // namespace caia

#endif  // CAIA_ATTRIBUTION_H_
