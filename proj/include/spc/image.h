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

#ifndef SPC_IMAGE_H_
#define SPC_IMAGE_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "spc/tensor.h"

namespace spc {

// H x W raster of class labels, the lossless structure layer.
class SemanticMap {
 public:
  SemanticMap() = default;
  SemanticMap(size_t width, size_t height, size_t num_classes,
              std::vector<uint8_t> labels);

  size_t width() const { return width_; }
  size_t height() const { return height_; }
  size_t pixels() const { return width_ * height_; }
  size_t num_classes() const { return num_classes_; }
  const std::vector<uint8_t>& labels() const { return labels_; }
  uint8_t label(size_t x, size_t y) const { return labels_[y * width_ + x]; }

  std::vector<size_t> ClassCounts() const;
  // presence[n] is true iff class n labels at least one pixel.
  std::vector<bool> Presence() const;

  bool operator==(const SemanticMap& other) const = default;

 private:
  size_t width_ = 0;
  size_t height_ = 0;
  size_t num_classes_ = 0;
  std::vector<uint8_t> labels_;
};

// Planar RGB image with values nominally in [0, 1], stored as (3, H, W).
class Image {
 public:
  Image() = default;
  Image(size_t width, size_t height);
  explicit Image(Tensor planes);

  size_t width() const { return planes_.dim(2); }
  size_t height() const { return planes_.dim(1); }
  const Tensor& planes() const { return planes_; }
  Tensor& planes() { return planes_; }
  double at(size_t c, size_t x, size_t y) const { return planes_.at(c, y, x); }
  double& at(size_t c, size_t x, size_t y) { return planes_.at(c, y, x); }

  Image Clamped() const;

 private:
  Tensor planes_;
};

// Binary netpbm: P6 for images, P5 for label maps, 8 bits per sample.
std::vector<uint8_t> EncodePpm(const Image& image);
Image DecodePpm(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> EncodePgm(size_t width, size_t height,
                               const std::vector<uint8_t>& samples);
// Returns samples, filling width/height.
std::vector<uint8_t> DecodePgm(const std::vector<uint8_t>& bytes,
                               size_t* width, size_t* height);

SemanticMap DecodeMapPgm(const std::vector<uint8_t>& bytes,
                         size_t num_classes);
std::vector<uint8_t> EncodeMapPgm(const SemanticMap& map);

std::vector<uint8_t> ReadFileBytes(const std::string& path);
void WriteFileBytes(const std::string& path, const std::vector<uint8_t>& bytes);

Image ReadPpm(const std::string& path);
void WritePpm(const std::string& path, const Image& image);
SemanticMap ReadMapPgm(const std::string& path, size_t num_classes);
void WriteMapPgm(const std::string& path, const SemanticMap& map);

}  // namespace spc

#endif  // SPC_IMAGE_H_
