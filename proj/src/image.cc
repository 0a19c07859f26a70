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

#include "spc/image.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

#include "spc/error.h"

namespace spc {

SemanticMap::SemanticMap(size_t width, size_t height, size_t num_classes,
                         std::vector<uint8_t> labels)
    : width_(width),
      height_(height),
      num_classes_(num_classes),
      labels_(std::move(labels)) {
  Require(width_ >= 1 && height_ >= 1, "semantic_map", "empty map");
  Require(num_classes_ >= 1 && num_classes_ <= 256, "semantic_map",
          "class count must be in [1, 256]");
  Require(labels_.size() == width_ * height_, "semantic_map",
          "label count does not match W*H");
  for (uint8_t l : labels_) {
    if (l >= num_classes_) {
      Fail(ErrorCode::kInvalidArgument, "semantic_map",
           "label " + std::to_string(l) + " >= class count " +
               std::to_string(num_classes_));
    }
  }
}

std::vector<size_t> SemanticMap::ClassCounts() const {
  std::vector<size_t> counts(num_classes_, 0);
  for (uint8_t l : labels_) ++counts[l];
  return counts;
}

std::vector<bool> SemanticMap::Presence() const {
  std::vector<bool> presence(num_classes_, false);
  for (uint8_t l : labels_) presence[l] = true;
  return presence;
}

Image::Image(size_t width, size_t height) : planes_({3, height, width}) {}

Image::Image(Tensor planes) : planes_(std::move(planes)) {
  Require(planes_.rank() == 3 && planes_.dim(0) == 3, "image",
          "planes must have shape (3, H, W), got " +
              ShapeToString(planes_.shape()));
}

Image Image::Clamped() const {
  Image out = *this;
  for (double& v : out.planes_.data()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

namespace {

// Parses "P?" header fields: magic, width, height, maxval, single
// whitespace, then returns the payload offset.
size_t ParseNetpbmHeader(const std::vector<uint8_t>& bytes, char kind,
                         size_t* width, size_t* height) {
  const char* where = kind == '6' ? "ppm" : "pgm";
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != kind) {
    Fail(ErrorCode::kDataFormat, where, "bad magic");
  }
  size_t pos = 2;
  auto next_int = [&]() -> size_t {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    size_t value = 0;
    size_t digits = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      value = value * 10 + (bytes[pos] - '0');
      ++pos;
      if (++digits > 9) Fail(ErrorCode::kDataFormat, where, "bad header");
    }
    if (digits == 0) Fail(ErrorCode::kDataFormat, where, "truncated header");
    return value;
  };
  *width = next_int();
  *height = next_int();
  const size_t maxval = next_int();
  if (maxval != 255) {
    Fail(ErrorCode::kDataFormat, where, "only 8-bit samples are supported");
  }
  if (*width == 0 || *height == 0) {
    Fail(ErrorCode::kDataFormat, where, "zero-sized image");
  }
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    Fail(ErrorCode::kDataFormat, where, "truncated header");
  }
  return pos + 1;
}

std::vector<uint8_t> Header(char kind, size_t width, size_t height) {
  const std::string h = std::string("P") + kind + "\n" +
                        std::to_string(width) + " " + std::to_string(height) +
                        "\n255\n";
  return std::vector<uint8_t>(h.begin(), h.end());
}

}  // namespace

std::vector<uint8_t> EncodePpm(const Image& image) {
  std::vector<uint8_t> out = Header('6', image.width(), image.height());
  for (size_t y = 0; y < image.height(); ++y) {
    for (size_t x = 0; x < image.width(); ++x) {
      for (size_t c = 0; c < 3; ++c) {
        const double v = std::clamp(image.at(c, x, y), 0.0, 1.0);
        out.push_back(static_cast<uint8_t>(std::lround(v * 255.0)));
      }
    }
  }
  return out;
}

Image DecodePpm(const std::vector<uint8_t>& bytes) {
  size_t width, height;
  const size_t offset = ParseNetpbmHeader(bytes, '6', &width, &height);
  if (bytes.size() - offset < width * height * 3) {
    Fail(ErrorCode::kDataFormat, "ppm", "truncated pixel data");
  }
  Image image(width, height);
  const uint8_t* p = bytes.data() + offset;
  for (size_t y = 0; y < height; ++y) {
    for (size_t x = 0; x < width; ++x) {
      for (size_t c = 0; c < 3; ++c) image.at(c, x, y) = *p++ / 255.0;
    }
  }
  return image;
}

std::vector<uint8_t> EncodePgm(size_t width, size_t height,
                               const std::vector<uint8_t>& samples) {
  Require(samples.size() == width * height, "pgm", "sample count mismatch");
  std::vector<uint8_t> out = Header('5', width, height);
  out.insert(out.end(), samples.begin(), samples.end());
  return out;
}

std::vector<uint8_t> DecodePgm(const std::vector<uint8_t>& bytes,
                               size_t* width, size_t* height) {
  const size_t offset = ParseNetpbmHeader(bytes, '5', width, height);
  if (bytes.size() - offset < *width * *height) {
    Fail(ErrorCode::kDataFormat, "pgm", "truncated pixel data");
  }
  return std::vector<uint8_t>(bytes.begin() + offset,
                              bytes.begin() + offset + *width * *height);
}

SemanticMap DecodeMapPgm(const std::vector<uint8_t>& bytes,
                         size_t num_classes) {
  size_t width, height;
  std::vector<uint8_t> labels = DecodePgm(bytes, &width, &height);
  for (uint8_t l : labels) {
    if (l >= num_classes) {
      Fail(ErrorCode::kDataFormat, "pgm",
           "label " + std::to_string(l) + " >= class count " +
               std::to_string(num_classes));
    }
  }
  return SemanticMap(width, height, num_classes, std::move(labels));
}

std::vector<uint8_t> EncodeMapPgm(const SemanticMap& map) {
  return EncodePgm(map.width(), map.height(), map.labels());
}

std::vector<uint8_t> ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kDataFormat, "read", "cannot open " + path);
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in),
                              std::istreambuf_iterator<char>());
}

void WriteFileBytes(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kDataFormat, "write", "cannot open " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) Fail(ErrorCode::kDataFormat, "write", "write failed for " + path);
}

Image ReadPpm(const std::string& path) { return DecodePpm(ReadFileBytes(path)); }

void WritePpm(const std::string& path, const Image& image) {
  WriteFileBytes(path, EncodePpm(image));
}

SemanticMap ReadMapPgm(const std::string& path, size_t num_classes) {
  return DecodeMapPgm(ReadFileBytes(path), num_classes);
}

void WriteMapPgm(const std::string& path, const SemanticMap& map) {
  WriteFileBytes(path, EncodeMapPgm(map));
}

}  // namespace spc
