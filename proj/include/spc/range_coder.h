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

#ifndef SPC_RANGE_CODER_H_
#define SPC_RANGE_CODER_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace spc {

inline constexpr int kCdfPrecisionBits = 16;
inline constexpr uint32_t kCdfTotal = 1u << kCdfPrecisionBits;

// Integer cumulative frequency table over a contiguous symbol range
// [min_symbol, max_symbol], optionally followed by an escape slot. Every
// slot has count >= 1 and the counts sum to exactly 2^16. Symbols outside
// the range are coded as the escape slot plus a raw 32-bit payload.
class CdfTable {
 public:
  // `probabilities[i]` is the mass of min_symbol + i. An escape slot is
  // added iff escape_mass > 0. Masses are renormalized, scaled to 2^16 and
  // rounded by largest remainder.
  static CdfTable Build(int32_t min_symbol, std::span<const double> probabilities,
                        double escape_mass);

  int32_t min_symbol() const { return min_symbol_; }
  int32_t max_symbol() const {
    return min_symbol_ + static_cast<int32_t>(alphabet_size_) - 1;
  }
  size_t alphabet_size() const { return alphabet_size_; }
  bool has_escape() const { return has_escape_; }
  size_t slots() const { return cdf_.size() - 1; }
  size_t escape_slot() const { return alphabet_size_; }

  uint32_t cumulative(size_t slot) const { return cdf_[slot]; }
  uint32_t count(size_t slot) const { return cdf_[slot + 1] - cdf_[slot]; }
  const std::vector<uint32_t>& cdf() const { return cdf_; }

  // Slot for an in-range symbol.
  std::optional<size_t> SlotOf(int64_t symbol) const;
  // Slot whose interval contains `value` in [0, 2^16).
  size_t FindSlot(uint32_t value) const;
  // Ideal code length of `symbol` under this table, including the raw
  // payload for escapes. Throws if the symbol is not codable.
  double CostBits(int64_t symbol) const;

  bool operator==(const CdfTable&) const = default;

 private:
  int32_t min_symbol_ = 0;
  size_t alphabet_size_ = 0;
  bool has_escape_ = false;
  std::vector<uint32_t> cdf_;  // slots() + 1 entries, 0 ... 2^16
};

// Carry-propagating range encoder with a 56-bit window and byte-wise
// renormalization. The range stays >= 2^48, so dividing by a 16-bit total
// loses at most 2^-32 of the interval per symbol.
class RangeEncoder {
 public:
  // Codes the interval [cum, cum + freq) out of `total` (<= 2^16).
  void Encode(uint32_t cum, uint32_t freq, uint32_t total);
  void EncodeSymbol(const CdfTable& table, int64_t symbol);
  void EncodeRaw32(uint32_t value);

  // Terminates with the shortest byte string whose zero-padded extension
  // lies in the final interval. The encoder must not be reused.
  std::vector<uint8_t> Finish();

 private:
  void ShiftLow();

  uint64_t low_ = 0;
  uint64_t range_ = (1ull << 56) - 1;
  uint8_t cache_ = 0;
  bool have_cache_ = false;
  uint64_t pending_ff_ = 0;
  std::vector<uint8_t> out_;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const uint8_t> bytes);

  // Returns a value in [0, total) identifying the coded interval; follow
  // with Consume() for the interval that contains it.
  uint32_t DecodeFreq(uint32_t total);
  void Consume(uint32_t cum, uint32_t freq);

  int32_t DecodeSymbol(const CdfTable& table);
  uint32_t DecodeRaw32();

  // Bytes read beyond the end of the input (decoded as zeros).
  size_t overrun() const { return overrun_; }

 private:
  uint8_t NextByte();

  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
  size_t overrun_ = 0;
  uint64_t code_ = 0;
  uint64_t range_ = (1ull << 56) - 1;
  uint64_t step_ = 0;
};

// Codes symbols[i] with *tables[i].
std::vector<uint8_t> EncodeSymbols(std::span<const int32_t> symbols,
                                   std::span<const CdfTable* const> tables);

// Inverse of EncodeSymbols. The result is re-encoded and compared with the
// input, so a stream that is not exactly EncodeSymbols(result) is rejected
// with a kDataFormat error rather than returned.
std::vector<int32_t> DecodeSymbols(std::span<const uint8_t> bytes,
                                   std::span<const CdfTable* const> tables);

// Sum of CostBits over the sequence: the table cross-entropy.
double TableCrossEntropyBits(std::span<const int32_t> symbols,
                             std::span<const CdfTable* const> tables);

}  // namespace spc

#endif  // SPC_RANGE_CODER_H_
