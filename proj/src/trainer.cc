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

#include "spc/trainer.h"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <limits>

#include "spc/error.h"
#include "spc/ops.h"
#include "spc/semantic_prior.h"

namespace spc {
namespace {

std::string Trim(std::string_view s) {
  const size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void BadValue(const std::string& key, const std::string& value) {
  Fail(ErrorCode::kDataFormat, "config",
       "invalid value '" + value + "' for key '" + key + "'");
}

template <typename T>
T ParseNumber(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) BadValue(key, value);
  return out;
}

double ParseReal(const std::string& key, const std::string& value) {
  size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    BadValue(key, value);
  }
  if (used != value.size() || !std::isfinite(out)) BadValue(key, value);
  return out;
}

bool ParseBool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true") return true;
  if (value == "0" || value == "false") return false;
  BadValue(key, value);
}

}  // namespace

Distortion MseDistortion() {
  return [](Graph&, Var reconstruction, const Tensor& target) {
    return ops::MeanSquaredError(reconstruction, target);
  };
}

RdVars BuildRdLoss(Graph& graph, const Image& image, const SemanticMap& map,
                   const ModelConfig& config, double lambda, QuantMode mode,
                   Rng* rng, const Distortion& distortion) {
  Require(lambda >= 0.0, "rd_loss", "lambda must be non-negative");
  if (image.width() != map.width() || image.height() != map.height()) {
    Fail(ErrorCode::kInvalidArgument, "rd_loss",
         "image and map sizes differ");
  }
  Var prior = BuildPrior(graph, graph.Constant(image.planes()), map, config);
  RateVars rate = BuildRate(graph, prior, map.Presence(), config, mode, rng);
  RdVars out;
  out.bits = rate.total_bits;
  out.reconstruction = BuildSynthesis(graph, rate.t_tilde, map, config);
  out.distortion = distortion(graph, out.reconstruction, image.planes());
  out.loss = ops::Add(ops::Scale(out.bits, lambda), out.distortion);
  return out;
}

RdResult RdLoss(const Model& model, const Image& image, const SemanticMap& map,
                double lambda, Rng& rng, const Distortion& distortion) {
  Graph graph(&model.params);
  RdVars v = BuildRdLoss(graph, image, map, model.config, lambda,
                         QuantMode::kTrain, &rng, distortion);
  graph.Backward(v.loss);
  RdResult out;
  out.loss = graph.value(v.loss).item();
  out.bits = graph.value(v.bits).item();
  out.distortion = graph.value(v.distortion).item();
  out.grads = graph.ParamGrads();
  return out;
}

RdResult EvaluateRd(const Model& model, const Image& image,
                    const SemanticMap& map, double lambda,
                    const Distortion& distortion) {
  Graph graph(&model.params);
  RdVars v = BuildRdLoss(graph, image, map, model.config, lambda,
                         QuantMode::kTest, nullptr, distortion);
  RdResult out;
  out.loss = graph.value(v.loss).item();
  out.bits = graph.value(v.bits).item();
  out.distortion = graph.value(v.distortion).item();
  return out;
}

TrainConfig ParseTrainConfig(const std::string& text) {
  TrainConfig config;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string line = Trim(std::string_view(text).substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      Fail(ErrorCode::kDataFormat, "config",
           "line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = Trim(std::string_view(line).substr(0, eq));
    const std::string value = Trim(std::string_view(line).substr(eq + 1));
    ModelConfig& m = config.model;
    if (key == "C" || key == "channels") {
      m.channels = ParseNumber<int>(key, value);
    } else if (key == "N" || key == "classes") {
      m.num_classes = ParseNumber<int>(key, value);
    } else if (key == "delta") {
      m.delta = ParseReal(key, value);
    } else if (key == "texnet_hidden") {
      m.texnet_hidden = ParseNumber<int>(key, value);
    } else if (key == "synnet_hidden") {
      m.synnet_hidden = ParseNumber<int>(key, value);
    } else if (key == "use_coords") {
      m.use_coords = ParseBool(key, value);
    } else if (key == "variant") {
      if (value == "hyperprior") {
        m.variant = EntropyVariant::kHyperprior;
      } else if (value == "factorized") {
        m.variant = EntropyVariant::kFactorized;
      } else {
        BadValue(key, value);
      }
    } else if (key == "lambda") {
      config.lambda = ParseReal(key, value);
    } else if (key == "lr") {
      config.lr = ParseReal(key, value);
    } else if (key == "epochs") {
      config.epochs = ParseNumber<int>(key, value);
    } else if (key == "seed") {
      config.seed = ParseNumber<uint64_t>(key, value);
    } else if (key == "dataset") {
      config.dataset = value;
    } else if (key == "max_images") {
      config.max_images = ParseNumber<size_t>(key, value);
    } else if (key == "ablation_samples") {
      config.ablation_samples = ParseNumber<size_t>(key, value);
    } else if (key == "ablation_test_samples") {
      config.ablation_test_samples = ParseNumber<size_t>(key, value);
    } else if (key == "ablation_classes") {
      config.ablation_classes = ParseNumber<size_t>(key, value);
    } else if (key == "ablation_steps") {
      config.ablation_steps = ParseNumber<int>(key, value);
    } else if (key == "ablation_scale") {
      config.ablation_scale = ParseReal(key, value);
    } else if (key == "ablation_snr") {
      config.ablation_snr = ParseReal(key, value);
    } else {
      Fail(ErrorCode::kDataFormat, "config", "unknown key '" + key + "'");
    }
  }
  try {
    config.model.Validate();
  } catch (const Error& e) {
    Fail(ErrorCode::kDataFormat, "config", e.what());
  }
  if (config.lambda < 0.0 || config.lr <= 0.0 || config.epochs < 1 ||
      config.ablation_steps < 0 || config.ablation_samples == 0 ||
      config.ablation_test_samples == 0 || config.ablation_classes == 0 ||
      config.ablation_scale <= 0.0 || config.ablation_snr <= 0.0) {
    Fail(ErrorCode::kDataFormat, "config", "value out of range");
  }
  return config;
}

TrainConfig LoadTrainConfig(const std::string& path) {
  const std::vector<uint8_t> bytes = ReadFileBytes(path);
  return ParseTrainConfig(std::string(bytes.begin(), bytes.end()));
}

std::vector<Sample> LoadDataset(const std::string& dir, size_t num_classes,
                                std::vector<std::string>* warnings) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    Fail(ErrorCode::kDataFormat, "load_dataset", "not a directory: " + dir);
  }
  std::vector<fs::path> images;
  for (const fs::directory_entry& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".ppm") images.push_back(entry.path());
  }
  std::sort(images.begin(), images.end());
  std::vector<Sample> out;
  for (const fs::path& path : images) {
    fs::path map_path = path;
    map_path.replace_extension(".pgm");
    try {
      Sample s;
      s.name = path.stem().string();
      s.image = ReadPpm(path.string());
      s.map = ReadMapPgm(map_path.string(), num_classes);
      if (s.image.width() != s.map.width() || s.image.height() != s.map.height()) {
        Fail(ErrorCode::kDataFormat, "load_dataset", "image and map sizes differ");
      }
      out.push_back(std::move(s));
    } catch (const Error& e) {
      if (warnings != nullptr) {
        warnings->push_back("skipping " + path.filename().string() + ": " +
                            e.what());
      }
    }
  }
  if (out.empty()) {
    Fail(ErrorCode::kDataFormat, "load_dataset",
         "no readable image/map pairs in " + dir);
  }
  return out;
}

TrainResult Train(const TrainConfig& config, const std::vector<Sample>& data,
                  const std::function<void(const EpochLog&)>& on_epoch,
                  const Distortion& distortion) {
  Require(!data.empty(), "train", "no training samples");
  Model model = InitModel(config.model, config.seed);
  Rng rng(config.seed ^ 0x5DEECE66Dull);
  AdamOptions adam;
  adam.lr = config.lr;

  TrainResult result;
  result.best = model;
  result.best_loss = std::numeric_limits<double>::infinity();
  const size_t used = config.max_images == 0
                          ? data.size()
                          : std::min(config.max_images, data.size());
  std::vector<size_t> order(used);
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.UniformInt(i)]);
    }
    EpochLog log;
    log.epoch = epoch;
    for (size_t index : order) {
      const Sample& s = data[index];
      RdResult rd = RdLoss(model, s.image, s.map, config.lambda, rng, distortion);
      AdamStep(model.params, rd.grads, adam);
      log.loss += rd.loss;
      log.bits += rd.bits;
      log.distortion += rd.distortion;
    }
    const double count = static_cast<double>(used);
    log.loss /= count;
    log.bits /= count;
    log.distortion /= count;
    result.log.push_back(log);
    if (log.loss < result.best_loss) {
      result.best_loss = log.loss;
      result.best_epoch = epoch;
      result.best = model;
    }
    if (on_epoch) on_epoch(log);
  }
  return result;
}

}  // namespace spc
