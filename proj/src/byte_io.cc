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

#include "spc/byte_io.h"

#include <bit>

#include "spc/error.h"

namespace spc {

void ByteWriter::U16(uint16_t v) {
  U8(static_cast<uint8_t>(v >> 8));
  U8(static_cast<uint8_t>(v));
}

void ByteWriter::U32(uint32_t v) {
  U16(static_cast<uint16_t>(v >> 16));
  U16(static_cast<uint16_t>(v));
}

void ByteWriter::U64(uint64_t v) {
  U32(static_cast<uint32_t>(v >> 32));
  U32(static_cast<uint32_t>(v));
}

void ByteWriter::F32(float v) { U32(std::bit_cast<uint32_t>(v)); }

void ByteWriter::F64(double v) { U64(std::bit_cast<uint64_t>(v)); }

void ByteWriter::Bytes(std::span<const uint8_t> data) {
  bytes_.insert(bytes_.end(), data.begin(), data.end());
}

void ByteWriter::Text(std::string_view text) {
  bytes_.insert(bytes_.end(), text.begin(), text.end());
}

std::span<const uint8_t> ByteReader::Take(size_t n, std::string_view field) {
  if (n > remaining()) {
    Fail(ErrorCode::kDataFormat, where_,
         "truncated " + std::string(field) + ": need " + std::to_string(n) +
             " bytes at offset " + std::to_string(pos_) + ", have " +
             std::to_string(remaining()));
  }
  std::span<const uint8_t> out = bytes_.subspan(pos_, n);
  pos_ += n;
  return out;
}

uint8_t ByteReader::U8(std::string_view field) { return Take(1, field)[0]; }

uint16_t ByteReader::U16(std::string_view field) {
  std::span<const uint8_t> b = Take(2, field);
  return static_cast<uint16_t>((b[0] << 8) | b[1]);
}

uint32_t ByteReader::U32(std::string_view field) {
  std::span<const uint8_t> b = Take(4, field);
  return (uint32_t{b[0]} << 24) | (uint32_t{b[1]} << 16) |
         (uint32_t{b[2]} << 8) | uint32_t{b[3]};
}

uint64_t ByteReader::U64(std::string_view field) {
  const uint64_t hi = U32(field);
  return (hi << 32) | U32(field);
}

float ByteReader::F32(std::string_view field) {
  return std::bit_cast<float>(U32(field));
}

double ByteReader::F64(std::string_view field) {
  return std::bit_cast<double>(U64(field));
}

std::span<const uint8_t> ByteReader::Bytes(size_t n, std::string_view field) {
  return Take(n, field);
}

}  // namespace spc
