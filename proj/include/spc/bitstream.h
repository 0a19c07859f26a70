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

#ifndef SPC_BITSTREAM_H_
#define SPC_BITSTREAM_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spc/model.h"

namespace spc {

inline constexpr char kContainerMagic[] = "SPC1";
inline constexpr uint8_t kContainerVersion = 1;
inline constexpr char kModelMagic[] = "SPM1";
inline constexpr uint8_t kModelVersion = 1;

// Decoded form of a .spc container.
struct CodedImage {
  uint32_t width = 0;
  uint32_t height = 0;
  uint16_t num_classes = 0;
  uint16_t channels = 0;
  float delta = 0.0f;
  std::vector<bool> presence;  // num_classes flags
  std::vector<uint8_t> map_segment;
  std::vector<uint8_t> hyper_segment;
  std::vector<uint8_t> prior_segment;

  size_t present_count() const;
  bool operator==(const CodedImage&) const = default;
};

// Bytes taken by everything except the three segment payloads.
size_t ContainerOverheadBytes(size_t num_classes);

std::vector<uint8_t> PackContainer(const CodedImage& coded);
CodedImage UnpackContainer(std::span<const uint8_t> bytes);

std::vector<uint8_t> SerializeModel(const Model& model);
Model DeserializeModel(std::span<const uint8_t> bytes);

void SaveModel(const std::string& path, const Model& model);
Model LoadModel(const std::string& path);

}  // namespace spc

#endif  // SPC_BITSTREAM_H_
