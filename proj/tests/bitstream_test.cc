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

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "spc/bitstream.h"
#include "spc/entropy_models.h"
#include "spc/error.h"
#include "spc/frozen_tables.h"
#include "spc/model.h"
#include "spc/rng.h"

namespace spc {
namespace {

std::vector<uint8_t> RandomBytes(size_t n, Rng& rng) {
  std::vector<uint8_t> out(n);
  for (uint8_t& b : out) b = static_cast<uint8_t>(rng.UniformInt(256));
  return out;
}

CodedImage RandomCoded(Rng& rng) {
  CodedImage c;
  c.width = 1 + static_cast<uint32_t>(rng.UniformInt(4096));
  c.height = 1 + static_cast<uint32_t>(rng.UniformInt(4096));
  c.num_classes = 1 + static_cast<uint16_t>(rng.UniformInt(255));
  c.channels = 16 * (1 + static_cast<uint16_t>(rng.UniformInt(8)));
  c.delta = 0.01f;
  for (size_t n = 0; n < c.num_classes; ++n) c.presence.push_back(rng.Uniform() < 0.5);
  c.map_segment = RandomBytes(rng.UniformInt(300), rng);
  c.hyper_segment = RandomBytes(rng.UniformInt(300), rng);
  c.prior_segment = RandomBytes(rng.UniformInt(300), rng);
  return c;
}

std::string MessageOf(std::span<const uint8_t> bytes) {
  try {
    UnpackContainer(bytes);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDataFormat);
    return e.what();
  }
  ADD_FAILURE() << "no error raised";
  return "";
}

uint32_t ReadU32(const std::vector<uint8_t>& b, size_t at) {
  return (uint32_t{b[at]} << 24) | (uint32_t{b[at + 1]} << 16) |
         (uint32_t{b[at + 2]} << 8) | b[at + 3];
}

TEST(ContainerTest, PackUnpackIdentity) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const CodedImage c = RandomCoded(rng);
    const std::vector<uint8_t> bytes = PackContainer(c);
    ASSERT_EQ(UnpackContainer(bytes), c) << trial;
    ASSERT_EQ(bytes.size(), ContainerOverheadBytes(c.num_classes) +
                                c.map_segment.size() + c.hyper_segment.size() +
                                c.prior_segment.size());
  }
}

TEST(ContainerTest, HeaderIsBigEndian) {
  CodedImage c;
  c.width = 0x01020304;
  c.height = 256;
  c.num_classes = 10;
  c.channels = 64;
  c.delta = 0.01f;
  c.presence = {true, false, true, true, false, false, false, false, true, true};
  c.map_segment = {0xAA};
  const std::vector<uint8_t> b = PackContainer(c);
  EXPECT_EQ(std::string(b.begin(), b.begin() + 4), "SPC1");
  EXPECT_EQ(b[4], kContainerVersion);
  EXPECT_EQ(ReadU32(b, 5), 0x01020304u);
  EXPECT_EQ(ReadU32(b, 9), 256u);
  EXPECT_EQ(b[13], 0);
  EXPECT_EQ(b[14], 10);
  EXPECT_EQ(b[15], 0);
  EXPECT_EQ(b[16], 64);
  EXPECT_EQ(ReadU32(b, 17), std::bit_cast<uint32_t>(0.01f));
  EXPECT_EQ(b[21], 0b10110000);
  EXPECT_EQ(b[22], 0b11000000);
  EXPECT_EQ(ReadU32(b, 23), 1u);
  EXPECT_EQ(b[27], 0xAA);
  EXPECT_EQ(ReadU32(b, 28), 0u);
  EXPECT_EQ(ReadU32(b, 32), 0u);
  EXPECT_EQ(b.size(), 36u);
}

TEST(ContainerTest, TruncationNamesTheShortSegment) {
  Rng rng(2);
  CodedImage c = RandomCoded(rng);
  c.map_segment = RandomBytes(40, rng);
  c.hyper_segment = RandomBytes(30, rng);
  c.prior_segment = RandomBytes(50, rng);
  const std::vector<uint8_t> bytes = PackContainer(c);
  const size_t header = ContainerOverheadBytes(c.num_classes) - 12;
  const size_t map_end = header + 4 + 40, hyper_end = map_end + 4 + 30;
  EXPECT_NE(MessageOf(std::span(bytes).first(header + 4 + 10)).find("map segment"),
            std::string::npos);
  EXPECT_NE(MessageOf(std::span(bytes).first(map_end + 2)).find("hyperprior segment length"),
            std::string::npos);
  EXPECT_NE(MessageOf(std::span(bytes).first(hyper_end + 4 + 49)).find("prior segment"),
            std::string::npos);
  for (size_t cut = 0; cut < bytes.size(); ++cut) {
    EXPECT_THROW(UnpackContainer(std::span(bytes).first(cut)), Error) << cut;
  }
}

TEST(ContainerTest, MalformedHeadersAreRejected) {
  Rng rng(3);
  CodedImage c = RandomCoded(rng);
  c.num_classes = 5;
  c.presence = {true, true, false, true, false};
  const std::vector<uint8_t> good = PackContainer(c);
  auto with = [&](size_t at, uint8_t value) {
    std::vector<uint8_t> b = good;
    b[at] = value;
    return b;
  };
  EXPECT_NE(MessageOf(with(0, 'X')).find("magic"), std::string::npos);
  EXPECT_NE(MessageOf(with(4, 2)).find("version"), std::string::npos);
  std::vector<uint8_t> zero_w = good;
  std::memset(zero_w.data() + 5, 0, 4);
  MessageOf(zero_w);
  std::vector<uint8_t> bad_delta = good;
  std::memset(bad_delta.data() + 17, 0, 4);
  MessageOf(bad_delta);
  MessageOf(with(21, good[21] | 0x01));  // padding bit
  std::vector<uint8_t> trailing = good;
  trailing.push_back(0);
  EXPECT_NE(MessageOf(trailing).find("trailing"), std::string::npos);
}

TEST(ContainerTest, FullSizeSymbolCount) {
  CodedImage c;
  c.width = c.height = 256;
  c.num_classes = 19;
  c.channels = 64;
  c.delta = 0.01f;
  c.presence.assign(19, true);
  EXPECT_EQ(c.present_count() * c.channels, 1216u);
  EXPECT_EQ(c.present_count() * (c.channels / 16), 76u);
}

ModelConfig SmallConfig() {
  ModelConfig config;
  config.channels = 32;
  config.num_classes = 7;
  config.texnet_hidden = 5;
  config.synnet_hidden = 6;
  return config;
}

TEST(ModelFileTest, RoundTripIsBitIdentical) {
  for (EntropyVariant variant :
       {EntropyVariant::kHyperprior, EntropyVariant::kFactorized}) {
    ModelConfig config = SmallConfig();
    config.variant = variant;
    config.use_coords = variant == EntropyVariant::kHyperprior;
    const Model model = InitModel(config, 17);
    const std::vector<uint8_t> bytes = SerializeModel(model);
    const Model back = DeserializeModel(bytes);
    EXPECT_EQ(back.config, model.config);
    EXPECT_TRUE(back.params.SameValues(model.params));
    EXPECT_EQ(SerializeModel(back), bytes);
  }
}

TEST(ModelFileTest, SaveAndLoadThroughFile) {
  const Model model = InitModel(SmallConfig(), 4);
  const std::string path =
      (std::filesystem::temp_directory_path() / "spc_model_test.spm").string();
  SaveModel(path, model);
  const Model back = LoadModel(path);
  EXPECT_TRUE(back.params.SameValues(model.params));
  std::filesystem::remove(path);
  EXPECT_THROW(LoadModel(path), Error);
}

TEST(ModelFileTest, AnyFlippedByteFailsChecksum) {
  const Model model = InitModel(SmallConfig(), 4);
  const std::vector<uint8_t> good = SerializeModel(model);
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<uint8_t> bad = good;
    bad[rng.UniformInt(bad.size())] ^= static_cast<uint8_t>(1 + rng.UniformInt(255));
    try {
      DeserializeModel(bad);
      ADD_FAILURE() << "accepted corrupt model, trial " << trial;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kDataFormat);
    }
  }
  EXPECT_THROW(DeserializeModel(std::span(good).first(good.size() - 1)), Error);
}

TEST(ModelFileTest, SharedFileGivesIdenticalTables) {
  const ModelConfig config;
  const Model trained = InitModel(config, 8);
  const std::vector<uint8_t> bytes = SerializeModel(trained);
  const Model encoder = DeserializeModel(bytes);
  const Model decoder = DeserializeModel(bytes);
  Rng rng(6);
  Tensor z({4, 19});
  for (double& v : z.data()) v = 0.01 * std::round(rng.Normal() * 30.0);
  const GaussianParams a = HyperDecode(z, encoder.params, config);
  const GaussianParams b = HyperDecode(z, decoder.params, config);
  GaussianTableBank bank_a(0.01), bank_b(0.01);
  for (size_t i = 0; i < a.mean.size(); ++i) {
    const FrozenGaussian fa = bank_a.Freeze(a.mean[i], a.scale[i]);
    const FrozenGaussian fb = bank_b.Freeze(b.mean[i], b.scale[i]);
    ASSERT_EQ(fa.offset, fb.offset);
    ASSERT_EQ(*fa.table, *fb.table);
  }
  const FactorizedDensity fd(kHyperDensityPrefix, 4);
  EXPECT_EQ(FreezeFactorizedTables(fd, encoder.params, 0.01),
            FreezeFactorizedTables(fd, decoder.params, 0.01));
}

}  // namespace
}  // namespace spc
