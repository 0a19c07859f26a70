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

#include "spc/map_codec.h"

#include <algorithm>
#include <unordered_map>

#include "spc/byte_io.h"
#include "spc/error.h"
#include "spc/range_coder.h"

namespace spc {
namespace {

constexpr uint32_t kIncrement = 24;
constexpr uint32_t kCountLimit = 1u << 16;
constexpr size_t kMaxPixels = size_t{1} << 30;

// Frequency counts for one (left, above) context.
struct AdaptiveModel {
  explicit AdaptiveModel(size_t symbols) : counts(symbols, 1), total(symbols) {}

  uint32_t Cumulative(size_t symbol) const {
    uint32_t cum = 0;
    for (size_t i = 0; i < symbol; ++i) cum += counts[i];
    return cum;
  }

  void Update(size_t symbol) {
    counts[symbol] += kIncrement;
    total += kIncrement;
    if (total > kCountLimit) {
      total = 0;
      for (uint32_t& c : counts) {
        c = (c + 1) / 2;
        total += c;
      }
    }
  }

  std::vector<uint32_t> counts;
  uint32_t total;
};

class ContextModels {
 public:
  explicit ContextModels(size_t classes) : classes_(classes) {}

  AdaptiveModel& At(const std::vector<uint8_t>& labels, size_t width, size_t x,
                    size_t y) {
    const uint32_t left = x > 0 ? labels[y * width + x - 1] : 0;
    const uint32_t above = y > 0 ? labels[(y - 1) * width + x] : 0;
    const uint32_t key = left * 256 + above;
    auto it = models_.find(key);
    if (it == models_.end()) it = models_.emplace(key, AdaptiveModel(classes_)).first;
    return it->second;
  }

 private:
  size_t classes_;
  std::unordered_map<uint32_t, AdaptiveModel> models_;
};

std::vector<uint8_t> ContextPayload(const SemanticMap& map) {
  ContextModels models(map.num_classes());
  RangeEncoder encoder;
  const std::vector<uint8_t>& labels = map.labels();
  for (size_t y = 0; y < map.height(); ++y) {
    for (size_t x = 0; x < map.width(); ++x) {
      AdaptiveModel& model = models.At(labels, map.width(), x, y);
      const uint8_t s = labels[y * map.width() + x];
      encoder.Encode(model.Cumulative(s), model.counts[s], model.total);
      model.Update(s);
    }
  }
  return encoder.Finish();
}

std::vector<uint8_t> ContextDecode(std::span<const uint8_t> payload,
                                   size_t width, size_t height,
                                   size_t classes) {
  std::vector<uint8_t> labels(width * height, 0);
  ContextModels models(classes);
  RangeDecoder decoder(payload);
  for (size_t y = 0; y < height; ++y) {
    for (size_t x = 0; x < width; ++x) {
      AdaptiveModel& model = models.At(labels, width, x, y);
      const uint32_t value = decoder.DecodeFreq(model.total);
      size_t s = 0;
      uint32_t cum = 0;
      while (cum + model.counts[s] <= value) cum += model.counts[s++];
      decoder.Consume(cum, model.counts[s]);
      model.Update(s);
      labels[y * width + x] = static_cast<uint8_t>(s);
    }
  }
  return labels;
}

std::vector<uint8_t> Segment(MapMode mode, const SemanticMap& map,
                             std::span<const uint8_t> payload) {
  ByteWriter w;
  w.U8(static_cast<uint8_t>(mode));
  w.U32(static_cast<uint32_t>(map.width()));
  w.U32(static_cast<uint32_t>(map.height()));
  w.U8(static_cast<uint8_t>(map.num_classes()));
  w.U32(static_cast<uint32_t>(payload.size()));
  w.Bytes(payload);
  return w.Take();
}

}  // namespace

std::vector<uint8_t> EncodeMap(const SemanticMap& map) {
  Require(map.num_classes() >= 1 && map.num_classes() <= 255, "encode_map",
          "class count must be in [1, 255]");
  Require(map.pixels() >= 1 && map.pixels() <= kMaxPixels, "encode_map",
          "map size out of range");
  for (uint8_t label : map.labels()) {
    Require(label < map.num_classes(), "encode_map", "label out of range");
  }
  const std::vector<uint8_t> coded = ContextPayload(map);
  if (coded.size() < map.pixels()) return Segment(MapMode::kContext, map, coded);
  return Segment(MapMode::kRaw, map, map.labels());
}

MapMode EncodedMapMode(std::span<const uint8_t> bytes) {
  ByteReader r(bytes, "decode_map");
  const uint8_t mode = r.U8("map mode");
  if (mode > 1) Fail(ErrorCode::kDataFormat, "decode_map", "unknown map mode");
  return static_cast<MapMode>(mode);
}

SemanticMap DecodeMap(std::span<const uint8_t> bytes) {
  ByteReader r(bytes, "decode_map");
  const MapMode mode = EncodedMapMode(bytes);
  r.U8("map mode");
  const uint32_t width = r.U32("map width");
  const uint32_t height = r.U32("map height");
  const uint8_t classes = r.U8("map class count");
  const uint32_t length = r.U32("map payload length");
  if (width == 0 || height == 0 || classes == 0 ||
      uint64_t{width} * height > kMaxPixels) {
    Fail(ErrorCode::kDataFormat, "decode_map", "invalid map header");
  }
  std::span<const uint8_t> payload = r.Bytes(length, "map payload");
  if (r.remaining() != 0) {
    Fail(ErrorCode::kDataFormat, "decode_map", "trailing bytes after map");
  }
  const size_t pixels = size_t{width} * height;
  std::vector<uint8_t> labels;
  if (mode == MapMode::kRaw) {
    if (payload.size() != pixels) {
      Fail(ErrorCode::kDataFormat, "decode_map", "raw payload size mismatch");
    }
    labels.assign(payload.begin(), payload.end());
    for (uint8_t label : labels) {
      if (label >= classes) {
        Fail(ErrorCode::kDataFormat, "decode_map", "label out of range");
      }
    }
    return SemanticMap(width, height, classes, std::move(labels));
  }
  labels = ContextDecode(payload, width, height, classes);
  SemanticMap map(width, height, classes, std::move(labels));
  const std::vector<uint8_t> recoded = ContextPayload(map);
  if (!std::equal(recoded.begin(), recoded.end(), payload.begin(),
                  payload.end())) {
    Fail(ErrorCode::kDataFormat, "decode_map", "corrupt context payload");
  }
  return map;
}

}  // namespace spc
