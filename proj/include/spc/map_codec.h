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

#ifndef SPC_MAP_CODEC_H_
#define SPC_MAP_CODEC_H_

#include <cstdint>
#include <span>
#include <vector>

#include "spc/image.h"

namespace spc {

enum class MapMode : uint8_t {
  kContext = 0,  // adaptive range coding conditioned on (left, above)
  kRaw = 1,      // one byte per label
};

// Segment layout, big-endian:
//   mode u8 | width u32 | height u32 | classes u8 | payload length u32 |
//   payload
inline constexpr size_t kMapHeaderBytes = 14;

std::vector<uint8_t> EncodeMap(const SemanticMap& map);
SemanticMap DecodeMap(std::span<const uint8_t> bytes);

// Mode recorded in an encoded segment.
MapMode EncodedMapMode(std::span<const uint8_t> bytes);

}  // namespace spc

#endif  // SPC_MAP_CODEC_H_
