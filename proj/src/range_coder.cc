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

#include "spc/range_coder.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "spc/error.h"

namespace spc {
namespace {

constexpr uint64_t kTop = 1ull << 48;
constexpr uint64_t kCarry = 1ull << 56;
constexpr int kWindowBytes = 7;

[[noreturn]] void Corrupt(const std::string& message) {
  Fail(ErrorCode::kDataFormat, "range_decode", message);
}

}  // namespace

CdfTable CdfTable::Build(int32_t min_symbol,
                         std::span<const double> probabilities,
                         double escape_mass) {
  Require(!probabilities.empty(), "build_table", "empty alphabet");
  Require(escape_mass >= 0.0 && std::isfinite(escape_mass), "build_table",
          "escape mass must be finite and non-negative");
  const bool has_escape = escape_mass > 0.0;
  const size_t slots = probabilities.size() + (has_escape ? 1 : 0);
  Require(slots <= kCdfTotal, "build_table", "alphabet larger than 2^16");
  Require(static_cast<int64_t>(min_symbol) +
                  static_cast<int64_t>(probabilities.size()) - 1 <=
              INT32_MAX,
          "build_table", "alphabet exceeds the 32-bit symbol range");

  std::vector<double> weights(probabilities.begin(), probabilities.end());
  if (has_escape) weights.push_back(escape_mass);
  double total_weight = 0.0;
  for (double w : weights) {
    Require(w >= 0.0 && std::isfinite(w), "build_table",
            "probabilities must be finite and non-negative");
    total_weight += w;
  }
  if (total_weight <= 0.0) {
    std::fill(weights.begin(), weights.end(), 1.0);
    total_weight = static_cast<double>(slots);
  }

  std::vector<double> ideal(slots);
  std::vector<int64_t> counts(slots);
  int64_t sum = 0;
  for (size_t i = 0; i < slots; ++i) {
    ideal[i] = weights[i] / total_weight * kCdfTotal;
    counts[i] = std::max<int64_t>(1, static_cast<int64_t>(std::floor(ideal[i])));
    sum += counts[i];
  }

  // Largest-remainder correction; ties go to the lower slot index.
  std::vector<size_t> order(slots);
  std::iota(order.begin(), order.end(), 0);
  auto remainder = [&](size_t i) {
    return ideal[i] - static_cast<double>(counts[i]);
  };
  while (sum != kCdfTotal) {
    const bool deficit = sum < kCdfTotal;
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      return deficit ? remainder(a) > remainder(b) : remainder(a) < remainder(b);
    });
    bool changed = false;
    for (size_t i : order) {
      if (sum == kCdfTotal) break;
      if (deficit) {
        ++counts[i];
        ++sum;
        changed = true;
      } else if (counts[i] > 1) {
        --counts[i];
        --sum;
        changed = true;
      }
    }
    if (!changed) Fail(ErrorCode::kInternal, "build_table", "cannot balance");
  }

  CdfTable table;
  table.min_symbol_ = min_symbol;
  table.alphabet_size_ = probabilities.size();
  table.has_escape_ = has_escape;
  table.cdf_.resize(slots + 1);
  table.cdf_[0] = 0;
  for (size_t i = 0; i < slots; ++i) {
    table.cdf_[i + 1] = table.cdf_[i] + static_cast<uint32_t>(counts[i]);
  }
  return table;
}

std::optional<size_t> CdfTable::SlotOf(int64_t symbol) const {
  if (symbol < min_symbol_ || symbol > max_symbol()) return std::nullopt;
  return static_cast<size_t>(symbol - min_symbol_);
}

size_t CdfTable::FindSlot(uint32_t value) const {
  // Last slot whose cumulative start is <= value.
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), value);
  return static_cast<size_t>(it - cdf_.begin()) - 1;
}

double CdfTable::CostBits(int64_t symbol) const {
  if (auto slot = SlotOf(symbol)) {
    return kCdfPrecisionBits - std::log2(static_cast<double>(count(*slot)));
  }
  if (!has_escape_) {
    Fail(ErrorCode::kInvalidArgument, "table_cost",
         "symbol " + std::to_string(symbol) + " outside table without escape");
  }
  return kCdfPrecisionBits -
         std::log2(static_cast<double>(count(escape_slot()))) + 32.0;
}

void RangeEncoder::ShiftLow() {
  if (low_ < (0xFFull << 48) || low_ >= kCarry) {
    const uint8_t carry = static_cast<uint8_t>(low_ >> 56);
    // The very first cached byte is the integer part of the code value,
    // always zero, and is not transmitted.
    if (have_cache_) out_.push_back(static_cast<uint8_t>(cache_ + carry));
    for (; pending_ff_ > 0; --pending_ff_) {
      out_.push_back(static_cast<uint8_t>(0xFF + carry));
    }
    cache_ = static_cast<uint8_t>(low_ >> 48);
    have_cache_ = true;
  } else {
    ++pending_ff_;
  }
  low_ = (low_ & (kTop - 1)) << 8;
}

void RangeEncoder::Encode(uint32_t cum, uint32_t freq, uint32_t total) {
  const uint64_t r = range_ / total;
  low_ += r * cum;
  range_ = r * freq;
  while (range_ < kTop) {
    range_ <<= 8;
    ShiftLow();
  }
}

void RangeEncoder::EncodeSymbol(const CdfTable& table, int64_t symbol) {
  if (auto slot = table.SlotOf(symbol)) {
    Encode(table.cumulative(*slot), table.count(*slot), kCdfTotal);
    return;
  }
  if (!table.has_escape()) {
    Fail(ErrorCode::kInvalidArgument, "range_encode",
         "symbol " + std::to_string(symbol) + " outside table without escape");
  }
  if (symbol < INT32_MIN || symbol > INT32_MAX) {
    Fail(ErrorCode::kInvalidArgument, "range_encode",
         "symbol " + std::to_string(symbol) + " exceeds 32 bits");
  }
  const size_t esc = table.escape_slot();
  Encode(table.cumulative(esc), table.count(esc), kCdfTotal);
  EncodeRaw32(static_cast<uint32_t>(static_cast<int32_t>(symbol)));
}

void RangeEncoder::EncodeRaw32(uint32_t value) {
  Encode(value >> 16, 1, kCdfTotal);
  Encode(value & 0xFFFF, 1, kCdfTotal);
}

std::vector<uint8_t> RangeEncoder::Finish() {
  // Round low up to the window's top byte; range >= 2^48 keeps the result
  // inside [low, low + range).
  low_ = (low_ + kTop - 1) & ~(kTop - 1);
  ShiftLow();
  ShiftLow();
  return std::move(out_);
}

RangeDecoder::RangeDecoder(std::span<const uint8_t> bytes) : bytes_(bytes) {
  for (int i = 0; i < kWindowBytes; ++i) code_ = (code_ << 8) | NextByte();
  if (code_ >= range_) Corrupt("initial code outside range");
}

uint8_t RangeDecoder::NextByte() {
  if (pos_ < bytes_.size()) return bytes_[pos_++];
  if (++overrun_ > kWindowBytes) Corrupt("read past end of stream");
  return 0;
}

uint32_t RangeDecoder::DecodeFreq(uint32_t total) {
  step_ = range_ / total;
  const uint64_t value = code_ / step_;
  if (value >= total) Corrupt("code value outside coding interval");
  return static_cast<uint32_t>(value);
}

void RangeDecoder::Consume(uint32_t cum, uint32_t freq) {
  code_ -= step_ * cum;
  range_ = step_ * freq;
  if (code_ >= range_) Corrupt("code value outside symbol interval");
  while (range_ < kTop) {
    code_ = (code_ << 8) | NextByte();
    range_ <<= 8;
  }
}

int32_t RangeDecoder::DecodeSymbol(const CdfTable& table) {
  const uint32_t value = DecodeFreq(kCdfTotal);
  const size_t slot = table.FindSlot(value);
  Consume(table.cumulative(slot), table.count(slot));
  if (table.has_escape() && slot == table.escape_slot()) {
    const int32_t symbol = static_cast<int32_t>(DecodeRaw32());
    if (table.SlotOf(symbol)) Corrupt("escaped symbol inside table range");
    return symbol;
  }
  return table.min_symbol() + static_cast<int32_t>(slot);
}

uint32_t RangeDecoder::DecodeRaw32() {
  const uint32_t hi = DecodeFreq(kCdfTotal);
  Consume(hi, 1);
  const uint32_t lo = DecodeFreq(kCdfTotal);
  Consume(lo, 1);
  return (hi << 16) | lo;
}

std::vector<uint8_t> EncodeSymbols(std::span<const int32_t> symbols,
                                   std::span<const CdfTable* const> tables) {
  Require(symbols.size() == tables.size(), "range_encode",
          "one table per symbol required");
  RangeEncoder encoder;
  for (size_t i = 0; i < symbols.size(); ++i) {
    encoder.EncodeSymbol(*tables[i], symbols[i]);
  }
  return encoder.Finish();
}

std::vector<int32_t> DecodeSymbols(std::span<const uint8_t> bytes,
                                   std::span<const CdfTable* const> tables) {
  RangeDecoder decoder(bytes);
  std::vector<int32_t> symbols;
  symbols.reserve(tables.size());
  for (const CdfTable* table : tables) {
    symbols.push_back(decoder.DecodeSymbol(*table));
  }
  const std::vector<uint8_t> reencoded = EncodeSymbols(symbols, tables);
  if (!std::equal(reencoded.begin(), reencoded.end(), bytes.begin(),
                  bytes.end())) {
    Corrupt("stream is not a canonical encoding of its decoded symbols");
  }
  return symbols;
}

double TableCrossEntropyBits(std::span<const int32_t> symbols,
                             std::span<const CdfTable* const> tables) {
  Require(symbols.size() == tables.size(), "table_cost",
          "one table per symbol required");
  double bits = 0.0;
  for (size_t i = 0; i < symbols.size(); ++i) {
    bits += tables[i]->CostBits(symbols[i]);
  }
  return bits;
}

}  // namespace spc
