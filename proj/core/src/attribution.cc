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

#include "caia/attribution.h"

#include <png.h>

#include <bit>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "caia/errors.h"
#include "caia/io.h"
#include "wire.h"

namespace caia {

double RegionShareOf(const FloatGrid& map, const MaskGrid& mask,
                     std::string_view sample_name) {
  const std::string who =
      sample_name.empty() ? std::string("sample") : std::string(sample_name);
  if (map.values.size() != map.height * map.width) {
    throw Error(ErrorKind::kShape, who + ": map storage does not match its size");
  }
  if (mask.height != map.height || mask.width != map.width ||
      mask.inside.size() != map.values.size()) {
    throw Error(ErrorKind::kShape,
                who + ": mask '" + mask.label + "' is " +
                    std::to_string(mask.height) + "x" + std::to_string(mask.width) +
                    ", map is " + std::to_string(map.height) + "x" +
                    std::to_string(map.width));
  }
  double total = 0.0;
  double inside = 0.0;
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    const double a = map.values[i];
    if (!std::isfinite(a) || a < 0.0) {
      throw Error(ErrorKind::kDegenerateSample,
                  who + ": attribution entries must be finite and nonnegative");
    }
    if (mask.inside[i] > 1) {
      throw Error(ErrorKind::kMalformedMask,
                  who + ": mask '" + mask.label + "' is not binary");
    }
    total += a;
    if (mask.inside[i]) inside += a;
  }
  if (!(total > 0.0)) {
    throw Error(ErrorKind::kDegenerateSample, who + ": attribution map sums to 0");
  }
  return inside / total;
}

RelativeAttributionReport RelativeAttribution(
    std::span<const AttributionSample> samples) {
  std::map<std::string, double> sums;
  RelativeAttributionReport report;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const auto& sample = samples[s];
    const std::string name =
        sample.name.empty() ? "sample " + std::to_string(s) : sample.name;
    for (const auto& [label, mask] : sample.masks) {
      sums[label] += RegionShareOf(sample.map, mask, name);
      ++report.regions[label].samples;
    }
  }
  for (auto& [label, region] : report.regions) {
    region.mean_share = sums[label] / static_cast<double>(region.samples);
  }
  return report;
}

FloatGrid ReadFloatGrid(const std::string& path) {
  std::istringstream in(io::ReadFile(path));
  std::string header_line, body;
  std::getline(in, header_line);
  std::getline(in, body);
  auto header = nlohmann::json::parse(header_line, nullptr, false);
  if (header.is_discarded() || !header.is_object() ||
      header.value("format", std::string()) != kGridFormat ||
      header.value("dtype", std::string()) != "f32le" ||
      !header.contains("height") || !header["height"].is_number_unsigned() ||
      !header.contains("width") || !header["width"].is_number_unsigned()) {
    throw Error(ErrorKind::kConfiguration,
                path + ": expected a caia-grid/1 f32le header");
  }
  FloatGrid grid;
  grid.height = header["height"].get<std::size_t>();
  grid.width = header["width"].get<std::size_t>();
  if (grid.height < 1 || grid.width < 1) {
    throw Error(ErrorKind::kShape, path + ": empty grid");
  }
  if (!body.empty() && body.back() == '\r') body.pop_back();
  auto bytes = wire::Base64Decode(body);
  if (!bytes || bytes->size() != 4 * grid.height * grid.width) {
    throw Error(ErrorKind::kShape, path + ": payload does not hold " +
                                       std::to_string(grid.height * grid.width) +
                                       " float32 values");
  }
  grid.values.resize(grid.height * grid.width);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes->data());
  for (std::size_t i = 0; i < grid.values.size(); ++i, p += 4) {
    const std::uint32_t bits = std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) |
                               (std::uint32_t{p[2]} << 16) |
                               (std::uint32_t{p[3]} << 24);
    grid.values[i] = std::bit_cast<float>(bits);
  }
  return grid;
}

void WriteFloatGrid(const std::string& path, const FloatGrid& grid) {
  if (grid.values.size() != grid.height * grid.width) {
    throw Error(ErrorKind::kShape, "grid storage does not match its size");
  }
  std::string bytes;
  bytes.reserve(4 * grid.values.size());
  for (double v : grid.values) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    for (int shift = 0; shift < 32; shift += 8) {
      bytes.push_back(static_cast<char>((bits >> shift) & 0xff));
    }
  }
  io::Json header;
  header["format"] = kGridFormat;
  header["height"] = grid.height;
  header["width"] = grid.width;
  header["dtype"] = "f32le";
  io::WriteFile(path, header.dump() + "\n" + wire::Base64Encode(bytes) + "\n");
}

MaskGrid ReadMaskPng(const std::string& path, std::string label) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw Error(ErrorKind::kMalformedMask, path + ": " + image.message);
  }
  if (image.format != PNG_FORMAT_GRAY) {
    png_image_free(&image);
    throw Error(ErrorKind::kMalformedMask,
                path + ": mask must be an 8-bit grayscale PNG without alpha");
  }
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    throw Error(ErrorKind::kMalformedMask, path + ": " + image.message);
  }
  MaskGrid mask;
  mask.height = image.height;
  mask.width = image.width;
  mask.label = std::move(label);
  mask.inside.resize(pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    if (pixels[i] != 0 && pixels[i] != 255) {
      throw Error(ErrorKind::kMalformedMask,
                  path + ": pixel value " + std::to_string(pixels[i]) +
                      " is neither 0 nor 255");
    }
    mask.inside[i] = pixels[i] == 255 ? 1 : 0;
  }
  return mask;
}

void WriteMaskPng(const std::string& path, const MaskGrid& mask) {
  if (mask.inside.size() != mask.height * mask.width) {
    throw Error(ErrorKind::kShape, "mask storage does not match its size");
  }
  std::vector<std::uint8_t> pixels(mask.inside.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    pixels[i] = mask.inside[i] ? 255 : 0;
  }
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(mask.width);
  image.height = static_cast<png_uint_32>(mask.height);
  image.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, pixels.data(), 0,
                               nullptr)) {
    throw Error(ErrorKind::kIo, path + ": " + image.message);
  }
}

}  // namespace caia
