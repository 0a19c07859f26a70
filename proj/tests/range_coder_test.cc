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
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "spc/entropy_models.h"
#include "spc/error.h"
#include "spc/frozen_tables.h"
#include "spc/range_coder.h"
#include "spc/rng.h"

namespace spc {
namespace {

std::vector<double> RandomDistribution(size_t n, double skew, Rng& rng) {
  std::vector<double> p(n);
  for (double& v : p) v = std::pow(rng.Uniform(), skew);
  const double sum = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& v : p) v /= sum;
  return p;
}

int32_t Sample(const CdfTable& table, Rng& rng) {
  const uint32_t u = static_cast<uint32_t>(rng.UniformInt(kCdfTotal));
  const size_t slot = table.FindSlot(u);
  return table.min_symbol() + static_cast<int32_t>(slot);
}

std::vector<const CdfTable*> Repeat(const CdfTable& table, size_t n) {
  return std::vector<const CdfTable*>(n, &table);
}

TEST(CdfTableTest, ExactFixedPointCounts) {
  const std::vector<double> p = {0.75, 0.25};
  const CdfTable t = CdfTable::Build(0, p, 0.0);
  EXPECT_EQ(t.count(0), 49152u);
  EXPECT_EQ(t.count(1), 16384u);
  EXPECT_FALSE(t.has_escape());
}

TEST(CdfTableTest, UniformAlphabet) {
  const std::vector<double> p(256, 1.0 / 256);
  const CdfTable t = CdfTable::Build(-128, p, 0.0);
  for (size_t i = 0; i < 256; ++i) EXPECT_EQ(t.count(i), 256u);
  EXPECT_EQ(t.min_symbol(), -128);
  EXPECT_EQ(t.max_symbol(), 127);
}

TEST(CdfTableTest, CountsArePositiveAndSumToTotal) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const size_t n = 1 + rng.UniformInt(3000);
    std::vector<double> p = RandomDistribution(n, 6.0, rng);
    const double escape = trial % 2 == 0 ? 1e-9 : 0.0;
    const CdfTable t = CdfTable::Build(0, p, escape);
    ASSERT_EQ(t.cdf().front(), 0u);
    ASSERT_EQ(t.cdf().back(), kCdfTotal);
    for (size_t s = 0; s < t.slots(); ++s) ASSERT_GE(t.count(s), 1u);
    ASSERT_EQ(t.has_escape(), escape > 0.0);
  }
}

TEST(CdfTableTest, EntropyCloseToInput) {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const std::vector<double> p = RandomDistribution(2 + rng.UniformInt(60), 2.0, rng);
    const CdfTable t = CdfTable::Build(0, p, 0.0);
    double h_in = 0.0, h_table = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
      if (p[i] > 0.0) h_in -= p[i] * std::log2(p[i]);
      const double q = t.count(i) / double(kCdfTotal);
      h_table -= q * std::log2(q);
    }
    EXPECT_NEAR(h_table, h_in, 0.01);
  }
}

TEST(CdfTableTest, DeterministicAndRejectsEmpty) {
  Rng rng(3);
  const std::vector<double> p = RandomDistribution(100, 3.0, rng);
  EXPECT_EQ(CdfTable::Build(5, p, 1e-6), CdfTable::Build(5, p, 1e-6));
  EXPECT_THROW(CdfTable::Build(0, std::vector<double>{}, 0.0), Error);
}

TEST(RangeCoderTest, EmptySequence) {
  const std::vector<int32_t> none;
  const std::vector<uint8_t> bytes = EncodeSymbols(none, {});
  EXPECT_LE(bytes.size(), 1u);
  EXPECT_TRUE(DecodeSymbols(bytes, {}).empty());
}

TEST(RangeCoderTest, UniformByteAlphabetLength) {
  const std::vector<double> p(256, 1.0 / 256);
  const CdfTable t = CdfTable::Build(0, p, 0.0);
  Rng rng(4);
  std::vector<int32_t> symbols(1000);
  for (int32_t& s : symbols) s = static_cast<int32_t>(rng.UniformInt(256));
  const auto tables = Repeat(t, symbols.size());
  const std::vector<uint8_t> bytes = EncodeSymbols(symbols, tables);
  EXPECT_GE(bytes.size(), 1000u);
  EXPECT_LE(bytes.size(), 1005u);
  EXPECT_EQ(DecodeSymbols(bytes, tables), symbols);
}

TEST(RangeCoderTest, SkewedStreamNearTableEntropy) {
  Rng rng(5);
  std::vector<CdfTable> distinct;
  for (int i = 0; i < 8; ++i) {
    distinct.push_back(CdfTable::Build(-20, RandomDistribution(64, 8.0, rng), 0.0));
  }
  const size_t n = 100000;
  std::vector<const CdfTable*> tables(n);
  std::vector<int32_t> symbols(n);
  for (size_t i = 0; i < n; ++i) {
    tables[i] = &distinct[rng.UniformInt(distinct.size())];
    symbols[i] = Sample(*tables[i], rng);
  }
  const std::vector<uint8_t> bytes = EncodeSymbols(symbols, tables);
  EXPECT_EQ(DecodeSymbols(bytes, tables), symbols);
  const double h = TableCrossEntropyBits(symbols, tables);
  const double bits = 8.0 * bytes.size();
  EXPECT_GE(bits, h);
  EXPECT_LE(bits, h * 1.005);
}

TEST(RangeCoderTest, LengthWithinThirtyTwoBitsOfTableEntropy) {
  Rng rng(6);
  for (int trial = 0; trial < 2000; ++trial) {
    const size_t alphabet = 1 + rng.UniformInt(300);
    const CdfTable t = CdfTable::Build(
        -static_cast<int32_t>(rng.UniformInt(100)),
        RandomDistribution(alphabet, 1.0 + rng.Uniform() * 10.0, rng),
        trial % 3 == 0 ? 1e-4 : 0.0);
    const size_t n = rng.UniformInt(300);
    std::vector<int32_t> symbols(n);
    for (int32_t& s : symbols) {
      s = t.has_escape() && rng.Uniform() < 0.05
              ? static_cast<int32_t>(rng.NextU64())
              : Sample(t, rng);
      if (!t.has_escape()) continue;
    }
    const auto tables = Repeat(t, n);
    const std::vector<uint8_t> bytes = EncodeSymbols(symbols, tables);
    ASSERT_EQ(DecodeSymbols(bytes, tables), symbols) << trial;
    const double h = TableCrossEntropyBits(symbols, tables);
    ASSERT_GE(8.0 * bytes.size(), h) << trial;
    ASSERT_LE(8.0 * bytes.size(), h + 32.0) << trial;
  }
}

TEST(RangeCoderTest, EscapeCarriesArbitraryValues) {
  const std::vector<double> p = {0.5, 0.5};
  const CdfTable t = CdfTable::Build(0, p, 1e-3);
  const std::vector<int32_t> symbols = {0, 1, -7, 2147483647, -2147483647 - 1, 1,
                                        3};
  const auto tables = Repeat(t, symbols.size());
  EXPECT_EQ(DecodeSymbols(EncodeSymbols(symbols, tables), tables), symbols);
  EXPECT_GT(t.CostBits(-7), 32.0);
}

TEST(RangeCoderTest, OutOfRangeWithoutEscapeIsError) {
  const std::vector<double> p = {0.5, 0.5};
  const CdfTable t = CdfTable::Build(0, p, 0.0);
  const std::vector<int32_t> symbols = {0, 2};
  EXPECT_THROW(EncodeSymbols(symbols, Repeat(t, 2)), Error);
}

TEST(RangeCoderTest, TruncatedOrExtendedStreamsAreRejected) {
  Rng rng(7);
  const CdfTable t = CdfTable::Build(0, RandomDistribution(40, 4.0, rng), 1e-6);
  std::vector<int32_t> symbols(500);
  for (int32_t& s : symbols) s = Sample(t, rng);
  const auto tables = Repeat(t, symbols.size());
  const std::vector<uint8_t> good = EncodeSymbols(symbols, tables);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<uint8_t> bad = good;
    if (trial % 2 == 0) {
      bad.resize(rng.UniformInt(bad.size()));
    } else {
      bad.push_back(static_cast<uint8_t>(rng.UniformInt(256)));
    }
    EXPECT_THROW(DecodeSymbols(bad, tables), Error) << trial;
  }
}

// A flipped byte can turn one valid stream into another. What must hold is
// that nothing but the exact encoding of the returned symbols is accepted.
TEST(RangeCoderTest, FlippedBytesAreRejectedOrCanonical) {
  Rng rng(7);
  const CdfTable t = CdfTable::Build(0, RandomDistribution(40, 4.0, rng), 1e-6);
  std::vector<int32_t> symbols(500);
  for (int32_t& s : symbols) s = Sample(t, rng);
  const auto tables = Repeat(t, symbols.size());
  const std::vector<uint8_t> good = EncodeSymbols(symbols, tables);
  int rejected = 0;
  const int trials = 1000;
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<uint8_t> bad = good;
    bad[rng.UniformInt(bad.size())] ^= static_cast<uint8_t>(1 + rng.UniformInt(255));
    try {
      const std::vector<int32_t> decoded = DecodeSymbols(bad, tables);
      EXPECT_NE(decoded, symbols);
      EXPECT_EQ(EncodeSymbols(decoded, tables), bad);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kDataFormat);
      ++rejected;
    }
  }
  EXPECT_GE(rejected, trials * 95 / 100);
}

TEST(RangeCoderTest, Deterministic) {
  Rng a(8), b(8);
  const CdfTable t = CdfTable::Build(0, RandomDistribution(30, 3.0, a), 0.0);
  RandomDistribution(30, 3.0, b);
  std::vector<int32_t> sa(1000), sb(1000);
  for (int32_t& s : sa) s = Sample(t, a);
  for (int32_t& s : sb) s = Sample(t, b);
  const auto tables = Repeat(t, 1000);
  EXPECT_EQ(EncodeSymbols(sa, tables), EncodeSymbols(sb, tables));
}

TEST(FrozenTablesTest, ScaleGridEndpoints) {
  EXPECT_DOUBLE_EQ(ScaleGridSteps(0), 0.1);
  EXPECT_NEAR(ScaleGridSteps(kNumScales - 1), 256.0, 1e-9);
  EXPECT_EQ(SnapScaleIndex(1e-9, 0.01), 0);
  EXPECT_EQ(SnapScaleIndex(1e9, 0.01), kNumScales - 1);
  EXPECT_EQ(SnapMeanSubsteps(0.0123, 0.01), 20);
}

TEST(FrozenTablesTest, NearbyScalesShareOneTable) {
  GaussianTableBank bank(0.01);
  const double s = ScaleGridSteps(30) * 0.01;
  const FrozenGaussian a = bank.Freeze(0.02, s * 1.01);
  const FrozenGaussian b = bank.Freeze(0.02, s * 0.99);
  EXPECT_EQ(a.scale_index, 30);
  EXPECT_EQ(a.table, b.table);
  EXPECT_EQ(*a.table, *b.table);
  EXPECT_EQ(a.offset, b.offset);
}

TEST(FrozenTablesTest, ModeAtMeanAndCoverage) {
  GaussianTableBank bank(0.01);
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const double mean = rng.Uniform(-1.0, 1.0);
    const double scale = 0.001 * std::pow(2560.0, rng.Uniform());
    const FrozenGaussian f = bank.Freeze(mean, scale);
    const int64_t at_mean = QuantizeIndex(f.mean, 0.01) - f.offset;
    const std::optional<size_t> slot = f.table->SlotOf(at_mean);
    ASSERT_TRUE(slot.has_value());
    for (size_t s = 0; s < f.table->alphabet_size(); ++s) {
      ASSERT_GE(f.table->count(*slot), f.table->count(s));
    }
    const double lo = (f.mean - kTableRadiusScales * f.scale) / 0.01;
    const double hi = (f.mean + kTableRadiusScales * f.scale) / 0.01;
    EXPECT_LE(f.offset + f.table->min_symbol(), std::floor(lo));
    EXPECT_GE(f.offset + f.table->max_symbol(), std::ceil(hi));
    EXPECT_TRUE(f.table->has_escape());
  }
}

TEST(FrozenTablesTest, CodedBitsTrackGaussianEstimate) {
  const double step = 0.01;
  GaussianTableBank bank(step);
  Rng rng(10);
  const size_t n = 10000;
  GaussianParams gp{Tensor({1, n}), Tensor({1, n})};
  for (size_t i = 0; i < n; ++i) {
    gp.mean[i] = rng.Uniform(-0.3, 0.3);
    gp.scale[i] = 0.001 * std::pow(1000.0, rng.Uniform());
  }
  const GaussianParams snapped = SnapGaussianParams(gp, step);
  Tensor symbols({1, n});
  std::vector<int32_t> relative(n);
  std::vector<const CdfTable*> tables(n);
  for (size_t i = 0; i < n; ++i) {
    const FrozenGaussian f = bank.Freeze(gp.mean[i], gp.scale[i]);
    const int64_t q =
        QuantizeIndex(snapped.mean[i] + snapped.scale[i] * rng.Normal(), step);
    symbols[i] = static_cast<double>(q);
    relative[i] = static_cast<int32_t>(q - f.offset);
    tables[i] = f.table;
  }
  const std::vector<uint8_t> bytes = EncodeSymbols(relative, tables);
  EXPECT_EQ(DecodeSymbols(bytes, tables), relative);
  const double estimate = GaussianBits(symbols, snapped, step).total_bits;
  EXPECT_NEAR(8.0 * bytes.size(), estimate, 0.02 * estimate + 32.0);
}

TEST(FrozenTablesTest, FactorizedTablesCoverDensity) {
  ParamStore params;
  Rng rng(11);
  const FactorizedDensity fd("fd", 3);
  fd.Init(params, 1.0, rng);
  const std::vector<CdfTable> tables = FreezeFactorizedTables(fd, params, 0.01);
  ASSERT_EQ(tables.size(), 3u);
  for (const CdfTable& t : tables) {
    EXPECT_TRUE(t.has_escape());
    EXPECT_LE(t.alphabet_size(), 16384u);
    EXPECT_TRUE(t.SlotOf(0).has_value());
  }
  EXPECT_EQ(FreezeFactorizedTables(fd, params, 0.01)[1], tables[1]);
}

}  // namespace
}  // namespace spc
