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

#include "spc/bitstream.h"

#include <cmath>

#include <zlib.h>

#include "spc/byte_io.h"
#include "spc/error.h"
#include "spc/image.h"

namespace spc {
namespace {

constexpr size_t kMagicBytes = 4;
constexpr size_t kMaxRank = 8;

void CheckMagic(ByteReader& r, const char* magic) {
  std::span<const uint8_t> got = r.Bytes(kMagicBytes, "magic");
  if (!std::equal(got.begin(), got.end(), magic)) {
    Fail(ErrorCode::kDataFormat, r.where(), "bad magic");
  }
}

void PutSegment(ByteWriter& w, const std::vector<uint8_t>& segment) {
  w.U32(static_cast<uint32_t>(segment.size()));
  w.Bytes(segment);
}

std::vector<uint8_t> GetSegment(ByteReader& r, const std::string& name) {
  const uint32_t length = r.U32(name + " segment length");
  std::span<const uint8_t> body = r.Bytes(length, name + " segment");
  return {body.begin(), body.end()};
}

uint32_t Crc32(std::span<const uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
  return static_cast<uint32_t>(crc);
}

}  // namespace

size_t CodedImage::present_count() const {
  size_t count = 0;
  for (bool p : presence) count += p ? 1 : 0;
  return count;
}

size_t ContainerOverheadBytes(size_t num_classes) {
  return kMagicBytes + 1 + 4 + 4 + 2 + 2 + 4 + (num_classes + 7) / 8 + 3 * 4;
}

std::vector<uint8_t> PackContainer(const CodedImage& coded) {
  Require(coded.presence.size() == coded.num_classes, "pack",
          "presence bitmap size does not match class count");
  Require(coded.delta > 0.0f && std::isfinite(coded.delta), "pack",
          "quantization step must be positive");
  ByteWriter w;
  w.Text(kContainerMagic);
  w.U8(kContainerVersion);
  w.U32(coded.width);
  w.U32(coded.height);
  w.U16(coded.num_classes);
  w.U16(coded.channels);
  w.F32(coded.delta);
  for (size_t base = 0; base < coded.presence.size(); base += 8) {
    uint8_t byte = 0;
    for (size_t i = 0; i < 8 && base + i < coded.presence.size(); ++i) {
      if (coded.presence[base + i]) byte |= static_cast<uint8_t>(0x80 >> i);
    }
    w.U8(byte);
  }
  PutSegment(w, coded.map_segment);
  PutSegment(w, coded.hyper_segment);
  PutSegment(w, coded.prior_segment);
  return w.Take();
}

CodedImage UnpackContainer(std::span<const uint8_t> bytes) {
  ByteReader r(bytes, "unpack");
  CheckMagic(r, kContainerMagic);
  const uint8_t version = r.U8("version");
  if (version != kContainerVersion) {
    Fail(ErrorCode::kDataFormat, "unpack",
         "unsupported version " + std::to_string(version));
  }
  CodedImage coded;
  coded.width = r.U32("width");
  coded.height = r.U32("height");
  coded.num_classes = r.U16("class count");
  coded.channels = r.U16("channel count");
  coded.delta = r.F32("quantization step");
  if (coded.width == 0 || coded.height == 0 || coded.num_classes == 0 ||
      coded.channels == 0) {
    Fail(ErrorCode::kDataFormat, "unpack", "zero dimension in header");
  }
  if (!(coded.delta > 0.0f) || !std::isfinite(coded.delta)) {
    Fail(ErrorCode::kDataFormat, "unpack", "quantization step must be positive");
  }
  std::span<const uint8_t> bitmap =
      r.Bytes((coded.num_classes + 7) / 8, "presence bitmap");
  coded.presence.resize(coded.num_classes);
  for (size_t n = 0; n < coded.num_classes; ++n) {
    coded.presence[n] = (bitmap[n / 8] >> (7 - n % 8)) & 1;
  }
  for (size_t n = coded.num_classes; n < bitmap.size() * 8; ++n) {
    if ((bitmap[n / 8] >> (7 - n % 8)) & 1) {
      Fail(ErrorCode::kDataFormat, "unpack", "padding bits set in bitmap");
    }
  }
  coded.map_segment = GetSegment(r, "map");
  coded.hyper_segment = GetSegment(r, "hyperprior");
  coded.prior_segment = GetSegment(r, "prior");
  if (r.remaining() != 0) {
    Fail(ErrorCode::kDataFormat, "unpack",
         std::to_string(r.remaining()) + " trailing bytes after prior segment");
  }
  return coded;
}

std::vector<uint8_t> SerializeModel(const Model& model) {
  model.config.Validate();
  const ModelConfig& c = model.config;
  ByteWriter w;
  w.Text(kModelMagic);
  w.U8(kModelVersion);
  w.U16(static_cast<uint16_t>(c.channels));
  w.U16(static_cast<uint16_t>(c.num_classes));
  w.F64(c.delta);
  w.U16(static_cast<uint16_t>(c.texnet_hidden));
  w.U16(static_cast<uint16_t>(c.synnet_hidden));
  w.U8(c.use_coords ? 1 : 0);
  w.U8(static_cast<uint8_t>(c.variant));
  const std::vector<std::string> names = model.params.Names();
  w.U32(static_cast<uint32_t>(names.size()));
  for (const std::string& name : names) {
    const Tensor& t = model.params.Get(name);
    w.U16(static_cast<uint16_t>(name.size()));
    w.Text(name);
    w.U8(static_cast<uint8_t>(t.rank()));
    for (size_t d : t.shape()) w.U32(static_cast<uint32_t>(d));
    for (double v : t.data()) w.F64(v);
  }
  w.U32(Crc32(w.bytes()));
  return w.Take();
}

Model DeserializeModel(std::span<const uint8_t> bytes) {
  if (bytes.size() < kMagicBytes + 4) {
    Fail(ErrorCode::kDataFormat, "load_model", "file too short");
  }
  const std::span<const uint8_t> body = bytes.first(bytes.size() - 4);
  ByteReader tail(bytes.last(4), "load_model");
  if (tail.U32("checksum") != Crc32(body)) {
    Fail(ErrorCode::kDataFormat, "load_model", "checksum mismatch");
  }
  ByteReader r(body, "load_model");
  CheckMagic(r, kModelMagic);
  const uint8_t version = r.U8("version");
  if (version != kModelVersion) {
    Fail(ErrorCode::kDataFormat, "load_model",
         "unsupported version " + std::to_string(version));
  }
  ModelConfig config;
  config.channels = r.U16("channels");
  config.num_classes = r.U16("classes");
  config.delta = r.F64("delta");
  config.texnet_hidden = r.U16("texnet width");
  config.synnet_hidden = r.U16("synnet width");
  config.use_coords = r.U8("coordinate flag") != 0;
  const uint8_t variant = r.U8("variant");
  if (variant > 1) Fail(ErrorCode::kDataFormat, "load_model", "unknown variant");
  config.variant = static_cast<EntropyVariant>(variant);
  try {
    config.Validate();
  } catch (const Error& e) {
    Fail(ErrorCode::kDataFormat, "load_model", e.what());
  }

  // Shapes must match what the configuration would create.
  const Model reference = InitModel(config, 0);
  Model model;
  model.config = config;
  const uint32_t count = r.U32("tensor count");
  if (count != reference.params.size()) {
    Fail(ErrorCode::kDataFormat, "load_model", "tensor count mismatch");
  }
  for (uint32_t i = 0; i < count; ++i) {
    const uint16_t name_length = r.U16("tensor name length");
    std::span<const uint8_t> raw = r.Bytes(name_length, "tensor name");
    const std::string name(raw.begin(), raw.end());
    if (!reference.params.Contains(name) || model.params.Contains(name)) {
      Fail(ErrorCode::kDataFormat, "load_model", "unexpected tensor " + name);
    }
    const uint8_t rank = r.U8("tensor rank");
    if (rank > kMaxRank) Fail(ErrorCode::kDataFormat, "load_model", "rank too large");
    Shape shape(rank);
    for (size_t& d : shape) d = r.U32("tensor extent");
    if (shape != reference.params.Get(name).shape()) {
      Fail(ErrorCode::kDataFormat, "load_model",
           "shape " + ShapeToString(shape) + " for " + name +
               " does not match configuration");
    }
    Tensor t(shape);
    for (double& v : t.data()) {
      v = r.F64("tensor values");
      if (!std::isfinite(v)) {
        Fail(ErrorCode::kDataFormat, "load_model", "non-finite value in " + name);
      }
    }
    model.params.Add(name, std::move(t));
  }
  if (r.remaining() != 0) {
    Fail(ErrorCode::kDataFormat, "load_model", "trailing bytes before checksum");
  }
  return model;
}

void SaveModel(const std::string& path, const Model& model) {
  WriteFileBytes(path, SerializeModel(model));
}

Model LoadModel(const std::string& path) {
  return DeserializeModel(ReadFileBytes(path));
}

}  // namespace spc
