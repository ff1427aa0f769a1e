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

#include <gtest/gtest.h>
#include <png.h>

#include <functional>
#include <random>

#include "caia/errors.h"
#include "caia/io.h"
#include "oracles.h"
#include "test_util.h"

namespace caia {
namespace {

FloatGrid Grid(std::size_t h, std::size_t w, std::vector<double> v) {
  return FloatGrid{h, w, std::move(v)};
}

MaskGrid Mask(std::size_t h, std::size_t w, std::vector<std::uint8_t> inside,
              std::string label = "region") {
  return MaskGrid{h, w, std::move(inside), std::move(label)};
}

ErrorKind KindOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::kIo;
}

TEST(RegionShareTest, FullAndEmptyMasks) {
  const auto map = Grid(2, 2, {1, 2, 3, 4});
  EXPECT_EQ(RegionShareOf(map, Mask(2, 2, {1, 1, 1, 1})), 1.0);
  EXPECT_EQ(RegionShareOf(map, Mask(2, 2, {0, 0, 0, 0})), 0.0);
}

TEST(RegionShareTest, UniformMapHalfMask) {
  EXPECT_EQ(RegionShareOf(Grid(2, 2, {1, 1, 1, 1}), Mask(2, 2, {1, 1, 0, 0})), 0.5);
}

TEST(RegionShareTest, MatchesReference) {
  std::mt19937_64 gen(8);
  std::exponential_distribution<double> mass(1.0);
  for (int n = 0; n < 200; ++n) {
    std::vector<double> v(64);
    std::vector<std::uint8_t> m(64);
    std::vector<int> mi(64);
    for (std::size_t i = 0; i < 64; ++i) {
      v[i] = mass(gen);
      m[i] = mi[i] = gen() % 2;
    }
    EXPECT_NEAR(RegionShareOf(Grid(8, 8, v), Mask(8, 8, m)), oracles::Share(v, mi),
                1e-12);
  }
}

TEST(RegionSharePropertyTest, PartitionSumsToOne) {
  std::mt19937_64 gen(9);
  std::exponential_distribution<double> mass(1.0);
  for (int n = 0; n < 200; ++n) {
    std::vector<double> v(30);
    for (auto& x : v) x = mass(gen);
    std::vector<std::uint8_t> a(30), b(30), c(30);
    for (std::size_t i = 0; i < 30; ++i) {
      const int which = gen() % 3;
      a[i] = which == 0;
      b[i] = which == 1;
      c[i] = which == 2;
    }
    const auto map = Grid(5, 6, v);
    EXPECT_NEAR(RegionShareOf(map, Mask(5, 6, a)) + RegionShareOf(map, Mask(5, 6, b)) +
                    RegionShareOf(map, Mask(5, 6, c)),
                1.0, 1e-12);
  }
}

TEST(RegionSharePropertyTest, ScaleInvariant) {
  std::mt19937_64 gen(10);
  std::exponential_distribution<double> mass(1.0);
  std::vector<double> v(16);
  for (auto& x : v) x = mass(gen);
  const auto mask = Mask(4, 4, {1, 0, 1, 0, 0, 1, 1, 0, 1, 1, 1, 1, 0, 0, 0, 1});
  const double base = RegionShareOf(Grid(4, 4, v), mask);
  for (double c : {1e-6, 1.0, 1e6}) {
    auto scaled = v;
    for (auto& x : scaled) x *= c;
    EXPECT_NEAR(RegionShareOf(Grid(4, 4, scaled), mask), base, 1e-12);
  }
}

TEST(RegionSharePropertyTest, GrowingMaskNeverLowersShare) {
  std::mt19937_64 gen(12);
  std::exponential_distribution<double> mass(1.0);
  for (int n = 0; n < 100; ++n) {
    std::vector<double> v(25);
    for (auto& x : v) x = mass(gen);
    std::vector<std::uint8_t> m(25, 0);
    double previous = 0.0;
    for (std::size_t i : {3u, 7u, 0u, 24u, 12u, 5u}) {
      m[i] = 1;
      const double s = RegionShareOf(Grid(5, 5, v), Mask(5, 5, m));
      EXPECT_GE(s, previous);
      previous = s;
    }
  }
}

TEST(RegionShareTest, Errors) {
  EXPECT_EQ(KindOf([] { RegionShareOf(Grid(2, 2, {0, 0, 0, 0}), Mask(2, 2, {1, 0, 0, 0})); }),
            ErrorKind::kDegenerateSample);
  EXPECT_EQ(KindOf([] { RegionShareOf(Grid(2, 2, {1, -1, 0, 0}), Mask(2, 2, {1, 0, 0, 0})); }),
            ErrorKind::kDegenerateSample);
  EXPECT_EQ(KindOf([] { RegionShareOf(Grid(2, 2, {1, 1, 1, 1}), Mask(2, 1, {1, 0})); }),
            ErrorKind::kShape);
  EXPECT_EQ(KindOf([] { RegionShareOf(Grid(2, 2, {1, 1, 1, 1}), Mask(2, 2, {1, 2, 0, 0})); }),
            ErrorKind::kMalformedMask);
}

TEST(RelativeAttributionTest, MeansOverSamplesWithRegion) {
  AttributionSample s1{"a", Grid(1, 2, {1, 1}), {}};
  s1.masks["hair"] = Mask(1, 2, {1, 0}, "hair");
  s1.masks["face"] = Mask(1, 2, {0, 1}, "face");
  AttributionSample s2{"b", Grid(1, 2, {3, 1}), {}};
  s2.masks["hair"] = Mask(1, 2, {1, 0}, "hair");
  const std::vector<AttributionSample> samples = {s1, s2};
  const auto report = RelativeAttribution(samples);
  EXPECT_EQ(report.regions.at("hair").samples, 2u);
  EXPECT_EQ(report.regions.at("hair").mean_share, (0.5 + 0.75) / 2);
  EXPECT_EQ(report.regions.at("face").samples, 1u);
  EXPECT_EQ(report.regions.at("face").mean_share, 0.5);
}

TEST(AttributionFilesTest, GridRoundTripIsFloat32Exact) {
  testing::TempDir dir;
  const auto g = Grid(2, 3, {0.0, 0.5, 1.25, 3.0, 1e-3, 7.0});
  WriteFloatGrid(dir.File("g.grid"), g);
  const auto back = ReadFloatGrid(dir.File("g.grid"));
  EXPECT_EQ(back.height, 2u);
  EXPECT_EQ(back.width, 3u);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(back.values[i], static_cast<double>(static_cast<float>(g.values[i])));
  }
}

TEST(AttributionFilesTest, MaskRoundTrip) {
  testing::TempDir dir;
  const auto m = Mask(2, 3, {1, 0, 0, 1, 1, 0}, "hair");
  WriteMaskPng(dir.File("m.png"), m);
  const auto back = ReadMaskPng(dir.File("m.png"), "hair");
  EXPECT_EQ(back.inside, m.inside);
  EXPECT_EQ(back.height, 2u);
  EXPECT_EQ(back.label, "hair");
}

TEST(AttributionFilesTest, NonBinaryMaskIsRejected) {
  testing::TempDir dir;
  std::vector<std::uint8_t> pixels = {0, 255, 128, 0};
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = 2;
  image.height = 2;
  image.format = PNG_FORMAT_GRAY;
  ASSERT_TRUE(png_image_write_to_file(&image, dir.File("bad.png").c_str(), 0,
                                      pixels.data(), 0, nullptr));
  EXPECT_EQ(KindOf([&] { ReadMaskPng(dir.File("bad.png"), "x"); }),
            ErrorKind::kMalformedMask);
  EXPECT_EQ(KindOf([&] { ReadMaskPng(dir.File("missing.png"), "x"); }),
            ErrorKind::kMalformedMask);
}

TEST(AttributionFilesTest, TruncatedGridIsShapeError) {
  testing::TempDir dir;
  io::WriteFile(dir.File("g.grid"),
                R"({"format":"caia-grid/1","height":2,"width":2,"dtype":"f32le"})"
                "\nAAAAAA==\n");
  EXPECT_EQ(KindOf([&] { ReadFloatGrid(dir.File("g.grid")); }), ErrorKind::kShape);
}

}  // namespace
}  // namespace caia
