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

#include "spc/analysis.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "spc/error.h"

namespace spc {
namespace {

constexpr size_t kBlocksPerSide = 8;

}  // namespace

Sample GenerateScene(size_t size, size_t num_classes, Rng& rng) {
  Require(size >= 8, "synth_data", "scene size must be at least 8");
  Require(num_classes >= 1 && num_classes <= 255, "synth_data",
          "class count must be in [1, 255]");
  const size_t block = std::max<size_t>(1, size / kBlocksPerSide);
  const size_t grid = (size + block - 1) / block;
  Require(num_classes <= grid * grid, "synth_data",
          "too many classes for the scene size");

  // One seed block per class, in distinct blocks.
  std::vector<size_t> cells(grid * grid);
  for (size_t i = 0; i < cells.size(); ++i) cells[i] = i;
  for (size_t i = 0; i < num_classes; ++i) {
    std::swap(cells[i], cells[i + rng.UniformInt(cells.size() - i)]);
  }
  std::vector<double> sx(num_classes), sy(num_classes);
  for (size_t n = 0; n < num_classes; ++n) {
    sx[n] = static_cast<double>(cells[n] % grid) + rng.Uniform(0.25, 0.75);
    sy[n] = static_cast<double>(cells[n] / grid) + rng.Uniform(0.25, 0.75);
  }
  // Each block takes the label of the seed nearest to its center; a seed
  // block always keeps its own class because the seed lies inside it.
  std::vector<uint8_t> block_label(grid * grid);
  for (size_t by = 0; by < grid; ++by) {
    for (size_t bx = 0; bx < grid; ++bx) {
      const size_t cell = by * grid + bx;
      size_t best = 0;
      double best_d = INFINITY;
      for (size_t n = 0; n < num_classes; ++n) {
        const double dx = static_cast<double>(bx) + 0.5 - sx[n];
        const double dy = static_cast<double>(by) + 0.5 - sy[n];
        double d = dx * dx + dy * dy;
        if (cells[n] == cell) d = -1.0;
        if (d < best_d) {
          best_d = d;
          best = n;
        }
      }
      block_label[cell] = static_cast<uint8_t>(best);
    }
  }
  std::vector<uint8_t> labels(size * size);
  for (size_t y = 0; y < size; ++y) {
    for (size_t x = 0; x < size; ++x) {
      labels[y * size + x] = block_label[(y / block) * grid + x / block];
    }
  }

  struct Style {
    double base[3];
    double tint[3];
    double amplitude;
  };
  std::vector<Style> styles(num_classes);
  for (Style& s : styles) {
    for (int c = 0; c < 3; ++c) {
      s.base[c] = rng.Uniform(0.15, 0.85);
      s.tint[c] = rng.Uniform(0.3, 1.0);
    }
    s.amplitude = rng.Uniform(0.02, 0.12);
  }
  Image image(size, size);
  for (size_t y = 0; y < size; ++y) {
    for (size_t x = 0; x < size; ++x) {
      const Style& s = styles[labels[y * size + x]];
      const double noise = rng.Normal();
      for (size_t c = 0; c < 3; ++c) {
        const double v = s.base[c] + s.amplitude * s.tint[c] * noise +
                         0.25 * s.amplitude * rng.Normal();
        image.at(c, x, y) = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  Sample sample;
  sample.image = std::move(image);
  sample.map = SemanticMap(size, size, num_classes, std::move(labels));
  return sample;
}

void WriteSyntheticDataset(const std::string& dir, size_t count, size_t size,
                           size_t num_classes, uint64_t seed) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    Fail(ErrorCode::kDataFormat, "synth_data",
         "cannot create " + dir + ": " + ec.message());
  }
  Rng rng(seed);
  for (size_t i = 0; i < count; ++i) {
    Rng scene_rng = rng.Fork();
    const Sample s = GenerateScene(size, num_classes, scene_rng);
    char stem[32];
    std::snprintf(stem, sizeof(stem), "scene_%04zu", i);
    const std::string base = (std::filesystem::path(dir) / stem).string();
    // PPM stores 8-bit samples; the dataset is what is on disk.
    WritePpm(base + ".ppm", s.image);
    WriteMapPgm(base + ".pgm", s.map);
  }
}

CorrelatedPriorGenerator::CorrelatedPriorGenerator(size_t channels,
                                                   double scale, double snr,
                                                   Rng& rng)
    : channels_(channels),
      scale_(scale),
      noise_std_(1.0 / std::sqrt(snr)),
      mixing_({channels, kFactors}) {
  Require(channels >= 1 && scale > 0.0 && snr > 0.0, "prior_generator",
          "invalid generator parameters");
  for (size_t c = 0; c < channels; ++c) {
    double norm = 0.0;
    for (size_t k = 0; k < kFactors; ++k) {
      mixing_.at(c, k) = rng.Normal();
      norm += mixing_.at(c, k) * mixing_.at(c, k);
    }
    norm = std::sqrt(norm);
    for (size_t k = 0; k < kFactors; ++k) mixing_.at(c, k) /= norm;
  }
}

Tensor CorrelatedPriorGenerator::Column(Rng& rng) const {
  double f[kFactors];
  for (double& v : f) v = rng.Normal();
  Tensor col({channels_});
  for (size_t c = 0; c < channels_; ++c) {
    double v = 0.0;
    for (size_t k = 0; k < kFactors; ++k) v += mixing_.at(c, k) * f[k];
    col[c] = scale_ * (v + noise_std_ * rng.Normal());
  }
  return col;
}

SemanticPrior CorrelatedPriorGenerator::Prior(size_t num_classes,
                                              Rng& rng) const {
  Tensor vectors({channels_, num_classes});
  for (size_t n = 0; n < num_classes; ++n) {
    const Tensor col = Column(rng);
    for (size_t c = 0; c < channels_; ++c) vectors.at(c, n) = col[c];
  }
  return SemanticPrior(std::move(vectors), std::vector<bool>(num_classes, true));
}

Tensor IndependentPriorGenerator::Column(Rng& rng) const {
  Tensor col({channels_});
  for (double& v : col.data()) v = scale_ * rng.Normal();
  return col;
}

SemanticPrior IndependentPriorGenerator::Prior(size_t num_classes,
                                               Rng& rng) const {
  Tensor vectors({channels_, num_classes});
  for (size_t n = 0; n < num_classes; ++n) {
    const Tensor col = Column(rng);
    for (size_t c = 0; c < channels_; ++c) vectors.at(c, n) = col[c];
  }
  return SemanticPrior(std::move(vectors), std::vector<bool>(num_classes, true));
}

Tensor PearsonMatrix(const Tensor& samples) {
  Require(samples.rank() == 2 && samples.dim(1) >= 2, "channel_correlation",
          "need a C x S matrix with at least two samples");
  const size_t c = samples.dim(0), s = samples.dim(1);
  std::vector<double> mean(c, 0.0);
  for (size_t i = 0; i < c; ++i) {
    for (size_t k = 0; k < s; ++k) mean[i] += samples.at(i, k);
    mean[i] /= static_cast<double>(s);
  }
  Tensor centered({c, s});
  std::vector<double> ss(c, 0.0);
  for (size_t i = 0; i < c; ++i) {
    for (size_t k = 0; k < s; ++k) {
      const double d = samples.at(i, k) - mean[i];
      centered.at(i, k) = d;
      ss[i] += d * d;
    }
  }
  Tensor r({c, c});
  for (size_t i = 0; i < c; ++i) {
    r.at(i, i) = 1.0;
    for (size_t j = i + 1; j < c; ++j) {
      double v = 0.0;
      if (ss[i] > 0.0 && ss[j] > 0.0) {
        double cross = 0.0;
        for (size_t k = 0; k < s; ++k) cross += centered.at(i, k) * centered.at(j, k);
        v = std::clamp(cross / std::sqrt(ss[i] * ss[j]), -1.0, 1.0);
      }
      r.at(i, j) = v;
      r.at(j, i) = v;
    }
  }
  return r;
}

double MeanAbsOffDiagonal(const Tensor& matrix) {
  const size_t c = matrix.dim(0);
  if (c < 2) return 0.0;
  double sum = 0.0;
  for (size_t i = 0; i < c; ++i) {
    for (size_t j = 0; j < c; ++j) {
      if (i != j) sum += std::abs(matrix.at(i, j));
    }
  }
  return sum / static_cast<double>(c * (c - 1));
}

Tensor CollectClassVectors(const std::vector<SemanticPrior>& priors,
                           size_t class_id) {
  std::vector<const SemanticPrior*> hits;
  for (const SemanticPrior& p : priors) {
    Require(class_id < p.num_classes(), "channel_correlation",
            "class id out of range");
    if (p.present(class_id)) hits.push_back(&p);
  }
  if (hits.empty()) {
    Fail(ErrorCode::kInvalidArgument, "channel_correlation",
         "class " + std::to_string(class_id) + " is absent from every sample");
  }
  Require(hits.size() >= 3, "channel_correlation",
          "class must be present in at least 3 samples");
  const size_t c = hits.front()->channels();
  Tensor out({c, hits.size()});
  for (size_t k = 0; k < hits.size(); ++k) {
    for (size_t i = 0; i < c; ++i) out.at(i, k) = hits[k]->at(i, class_id);
  }
  return out;
}

Tensor ChannelCorrelation(const std::vector<Sample>& data, const Model& model,
                          size_t class_id) {
  std::vector<SemanticPrior> priors;
  priors.reserve(data.size());
  for (const Sample& s : data) {
    priors.push_back(ExtractPrior(s.image, s.map, model.params, model.config));
  }
  return PearsonMatrix(CollectClassVectors(priors, class_id));
}

std::string MatrixCsv(const Tensor& matrix) {
  std::ostringstream os;
  os.precision(17);
  for (size_t i = 0; i < matrix.dim(0); ++i) {
    for (size_t j = 0; j < matrix.dim(1); ++j) {
      if (j > 0) os << ',';
      os << matrix.at(i, j);
    }
    os << "\r\n";
  }
  return os.str();
}

std::vector<uint8_t> MatrixHeatmapPgm(const Tensor& matrix) {
  const size_t rows = matrix.dim(0), cols = matrix.dim(1);
  std::vector<uint8_t> samples(rows * cols);
  for (size_t i = 0; i < rows * cols; ++i) {
    const double v = std::clamp(matrix[i], -1.0, 1.0);
    samples[i] = static_cast<uint8_t>(std::lround((v + 1.0) * 127.5));
  }
  return EncodePgm(cols, rows, samples);
}

}  // namespace spc
