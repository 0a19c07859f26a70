// Copyright 2026 The SPC Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <cstdint>
#include <vector>

#include <gtest/gtest.h>

#include "spc/analysis.h"
#include "spc/error.h"
#include "spc/image.h"
#include "spc/map_codec.h"
#include "spc/rng.h"

namespace spc {
namespace {

SemanticMap RandomMap(size_t w, size_t h, size_t n, Rng& rng) {
  std::vector<uint8_t> labels(w * h);
  for (uint8_t& l : labels) l = static_cast<uint8_t>(rng.UniformInt(n));
  return SemanticMap(w, h, n, std::move(labels));
}

// Axis-aligned rectangles painted over a background.
SemanticMap RectangleMap(size_t w, size_t h, size_t n, Rng& rng) {
  std::vector<uint8_t> labels(w * h, static_cast<uint8_t>(rng.UniformInt(n)));
  const size_t rects = rng.UniformInt(8);
  for (size_t r = 0; r < rects; ++r) {
    const size_t x0 = rng.UniformInt(w), y0 = rng.UniformInt(h);
    const size_t x1 = x0 + rng.UniformInt(w - x0) + 1;
    const size_t y1 = y0 + rng.UniformInt(h - y0) + 1;
    const uint8_t label = static_cast<uint8_t>(rng.UniformInt(n));
    for (size_t y = y0; y < y1; ++y) {
      for (size_t x = x0; x < x1; ++x) labels[y * w + x] = label;
    }
  }
  return SemanticMap(w, h, n, std::move(labels));
}

SemanticMap QuadrantMap(size_t size) {
  std::vector<uint8_t> labels(size * size);
  for (size_t y = 0; y < size; ++y) {
    for (size_t x = 0; x < size; ++x) {
      labels[y * size + x] = static_cast<uint8_t>((y >= size / 2) * 2 + (x >= size / 2));
    }
  }
  return SemanticMap(size, size, 4, std::move(labels));
}

TEST(MapCodecTest, RoundTripsRandomAndStructuredMaps) {
  Rng rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const size_t w = 1 + rng.UniformInt(40), h = 1 + rng.UniformInt(40);
    const size_t n = 1 + rng.UniformInt(255);
    const SemanticMap map = trial % 2 == 0 ? RandomMap(w, h, n, rng)
                                           : RectangleMap(w, h, n, rng);
    ASSERT_EQ(DecodeMap(EncodeMap(map)), map) << trial;
  }
}

TEST(MapCodecTest, ConstantMapIsTiny) {
  const SemanticMap map(256, 256, 19, std::vector<uint8_t>(256 * 256, 7));
  const std::vector<uint8_t> bytes = EncodeMap(map);
  EXPECT_LE(bytes.size(), 64u);
  EXPECT_EQ(EncodedMapMode(bytes), MapMode::kContext);
  EXPECT_EQ(DecodeMap(bytes), map);
}

TEST(MapCodecTest, QuadrantMapUnderThreeHundredthsBpp) {
  const SemanticMap map = QuadrantMap(256);
  const std::vector<uint8_t> bytes = EncodeMap(map);
  EXPECT_LE(8.0 * bytes.size() / (256.0 * 256.0), 0.03);
  EXPECT_EQ(DecodeMap(bytes), map);
}

TEST(MapCodecTest, SyntheticSceneMapsUnderThreeHundredthsBpp) {
  Rng rng(2);
  for (int i = 0; i < 5; ++i) {
    const Sample s = GenerateScene(256, 19, rng);
    const std::vector<uint8_t> bytes = EncodeMap(s.map);
    EXPECT_LE(8.0 * bytes.size() / (256.0 * 256.0), 0.03) << i;
    EXPECT_EQ(DecodeMap(bytes), s.map);
  }
}

TEST(MapCodecTest, RandomLabelsAreIncompressible) {
  Rng rng(3);
  const SemanticMap map = RandomMap(256, 256, 19, rng);
  const std::vector<uint8_t> bytes = EncodeMap(map);
  const double bound = 256.0 * 256.0 * std::log2(19.0) / 8.0;
  EXPECT_GE(bytes.size(), 0.99 * bound);
  EXPECT_EQ(DecodeMap(bytes), map);
}

TEST(MapCodecTest, NeverMuchLargerThanRaw) {
  Rng rng(4);
  for (size_t n : {2, 19, 200, 255}) {
    const SemanticMap map = RandomMap(64, 48, n, rng);
    const std::vector<uint8_t> bytes = EncodeMap(map);
    EXPECT_LE(bytes.size(), map.pixels() + kMapHeaderBytes + 16) << n;
  }
  const SemanticMap noisy = RandomMap(64, 48, 255, rng);
  EXPECT_EQ(EncodedMapMode(EncodeMap(noisy)), MapMode::kRaw);
}

TEST(MapCodecTest, MalformedSegmentsAreRejected) {
  Rng rng(5);
  const SemanticMap map = RectangleMap(32, 32, 9, rng);
  const std::vector<uint8_t> good = EncodeMap(map);
  for (size_t cut = 0; cut < good.size(); ++cut) {
    EXPECT_THROW(DecodeMap(std::span(good).first(cut)), Error) << cut;
  }
  std::vector<uint8_t> extended = good;
  extended.push_back(0);
  EXPECT_THROW(DecodeMap(extended), Error);
  std::vector<uint8_t> bad_mode = good;
  bad_mode[0] = 9;
  EXPECT_THROW(DecodeMap(bad_mode), Error);
  std::vector<uint8_t> zero_width = good;
  zero_width[1] = zero_width[2] = zero_width[3] = zero_width[4] = 0;
  EXPECT_THROW(DecodeMap(zero_width), Error);
}

TEST(MapCodecTest, RawLabelsOutOfRangeAreRejected) {
  Rng rng(6);
  const SemanticMap map = RandomMap(16, 16, 255, rng);
  std::vector<uint8_t> bytes = EncodeMap(map);
  ASSERT_EQ(EncodedMapMode(bytes), MapMode::kRaw);
  bytes[9] = 10;  // class count
  EXPECT_THROW(DecodeMap(bytes), Error);
}

}  // namespace
}  // namespace spc
