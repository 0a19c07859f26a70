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

// Command-line front end: synth-data, train, encode, decode, inspect,
// analyze-corr, ablate and gradcheck.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spc/ablation.h"
#include "spc/analysis.h"
#include "spc/bitstream.h"
#include "spc/codec.h"
#include "spc/error.h"
#include "spc/gradcheck.h"
#include "spc/image.h"
#include "spc/model.h"
#include "spc/rng.h"
#include "spc/semantic_prior.h"
#include "spc/trainer.h"

namespace spc {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

std::string Printf(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, value);
  return buf;
}

struct SynthArgs {
  std::string out;
  size_t count = 20;
  size_t size = 256;
  size_t classes = 19;
  uint64_t seed = 1;
};

int RunSynth(const SynthArgs& args) {
  std::filesystem::create_directories(args.out);
  WriteSyntheticDataset(args.out, args.count, args.size, args.classes,
                        args.seed);
  std::cout << "wrote " << args.count << " scenes to " << args.out << "\n";
  return kExitOk;
}

struct TrainArgs {
  std::string config;
  std::string out;
  std::string data;
};

int RunTrain(const TrainArgs& args) {
  TrainConfig config = LoadTrainConfig(args.config);
  if (!args.data.empty()) config.dataset = args.data;
  if (config.dataset.empty()) {
    Fail(ErrorCode::kInvalidArgument, "train", "no dataset in config or --data");
  }
  std::vector<std::string> warnings;
  const std::vector<Sample> data =
      LoadDataset(config.dataset, static_cast<size_t>(config.model.num_classes),
                  &warnings);
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "training on " << data.size() << " images\n";
  const TrainResult result = Train(config, data, [](const EpochLog& log) {
    std::cout << "epoch " << log.epoch << " loss " << Printf("%.6f", log.loss)
              << " bits " << Printf("%.2f", log.bits) << " mse "
              << Printf("%.6f", log.distortion) << "\n"
              << std::flush;
  });
  SaveModel(args.out, result.best);
  std::cout << "saved epoch " << result.best_epoch << " (loss "
            << Printf("%.6f", result.best_loss) << ") to " << args.out << "\n";
  return kExitOk;
}

struct EncodeArgs {
  std::string model;
  std::string image;
  std::string map;
  std::string out;
};

int RunEncode(const EncodeArgs& args) {
  const Model model = LoadModel(args.model);
  const Image image = ReadPpm(args.image);
  const SemanticMap map =
      ReadMapPgm(args.map, static_cast<size_t>(model.config.num_classes));
  Require(image.width() == map.width() && image.height() == map.height(),
          "encode", "image and map sizes differ");
  const EncodedPrior encoded = EncodeImage(model, image, map);
  WriteFileBytes(args.out, PackContainer(encoded.coded));
  std::cout << FormatRateReport(MakeRateReport(encoded.coded, &model));
  return kExitOk;
}

struct DecodeArgs {
  std::string model;
  std::string in;
  std::string out;
  std::optional<size_t> swap_region;
  std::string ref;
};

int RunDecode(const DecodeArgs& args) {
  const Model model = LoadModel(args.model);
  DecodedLayers layers =
      DecodeLayers(model, UnpackContainer(ReadFileBytes(args.in)));
  if (args.swap_region.has_value()) {
    if (args.ref.empty()) {
      Fail(ErrorCode::kInvalidArgument, "decode",
           "--swap-region needs --ref");
    }
    const DecodedLayers reference =
        DecodeLayers(model, UnpackContainer(ReadFileBytes(args.ref)));
    layers.prior =
        SwapRegionPrior(layers.prior, reference.prior, *args.swap_region);
  }
  WritePpm(args.out, Reconstruct(model, layers));
  std::cout << "wrote " << args.out << "\n";
  return kExitOk;
}

struct InspectArgs {
  std::string in;
  std::string model;
  bool csv = false;
};

int RunInspect(const InspectArgs& args) {
  const CodedImage coded = UnpackContainer(ReadFileBytes(args.in));
  std::optional<Model> model;
  if (!args.model.empty()) {
    model = LoadModel(args.model);
    DecodeLayers(*model, coded);
  }
  const RateReport report =
      MakeRateReport(coded, model.has_value() ? &*model : nullptr);
  std::cout << (args.csv ? RateReportCsv(report) : FormatRateReport(report));
  return kExitOk;
}

struct CorrArgs {
  std::string model;
  std::string data;
  size_t class_id = 0;
  std::string generator;
  size_t samples = 100;
  size_t channels = 64;
  uint64_t seed = 1;
  std::string csv;
  std::string pgm;
};

int RunCorr(const CorrArgs& args) {
  Tensor matrix;
  if (!args.generator.empty()) {
    Rng rng(args.seed);
    Tensor samples({args.channels, args.samples});
    auto fill = [&](const auto& generator) {
      for (size_t s = 0; s < args.samples; ++s) {
        const Tensor col = generator.Column(rng);
        for (size_t c = 0; c < args.channels; ++c) samples.at(c, s) = col[c];
      }
    };
    if (args.generator == "correlated") {
      Rng mixing_rng = rng.Fork();
      fill(CorrelatedPriorGenerator(args.channels, 1.0, 10.0, mixing_rng));
    } else if (args.generator == "independent") {
      fill(IndependentPriorGenerator(args.channels, 1.0));
    } else {
      Fail(ErrorCode::kInvalidArgument, "analyze-corr",
           "unknown generator: " + args.generator);
    }
    matrix = PearsonMatrix(samples);
  } else {
    if (args.model.empty() || args.data.empty()) {
      Fail(ErrorCode::kInvalidArgument, "analyze-corr",
           "need --model and --data, or --generator");
    }
    const Model model = LoadModel(args.model);
    std::vector<std::string> warnings;
    const std::vector<Sample> data = LoadDataset(
        args.data, static_cast<size_t>(model.config.num_classes), &warnings);
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
    matrix = ChannelCorrelation(data, model, args.class_id);
  }
  if (!args.csv.empty()) {
    const std::string text = MatrixCsv(matrix);
    WriteFileBytes(args.csv, std::vector<uint8_t>(text.begin(), text.end()));
  }
  if (!args.pgm.empty()) WriteFileBytes(args.pgm, MatrixHeatmapPgm(matrix));
  std::cout << "channels " << matrix.dim(0) << " mean_abs_offdiag "
            << Printf("%.6f", MeanAbsOffDiagonal(matrix)) << "\n";
  return kExitOk;
}

int RunAblate(const std::string& config_path) {
  const TrainConfig config = LoadTrainConfig(config_path);
  const AblationResult result = RunAblation(
      config, [](const std::string& line) { std::cerr << line << "\n"; });
  const double symbols = static_cast<double>(result.test_samples) *
                         static_cast<double>(result.symbols_per_sample);
  auto row = [&](const char* name, const VariantBits& v) {
    std::cout << name << " coded_bits " << Printf("%.0f", v.coded_bits)
              << " hyper_bits " << Printf("%.0f", v.hyper_bits)
              << " estimated_bits " << Printf("%.1f", v.estimated_bits)
              << " bits_per_symbol " << Printf("%.4f", v.coded_bits / symbols)
              << "\n";
  };
  row("hyperprior", result.hyperprior);
  row("factorized", result.factorized);
  std::cout << "saving " << Printf("%.2f", 100.0 * result.saving()) << "%\n";
  return kExitOk;
}

int RunGradcheck(uint64_t seed, int points) {
  bool ok = true;
  for (const GradCheckResult& r : RunGradientSuites(seed, points)) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << " max_rel_err "
              << Printf("%.3e", r.max_error) << " coords " << r.coordinates
              << "\n";
    ok = ok && r.passed;
  }
  return ok ? kExitOk : kExitInternal;
}

int ExitCodeFor(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kInvalidArgument:
      return kExitUsage;
    case ErrorCode::kDataFormat:
      return kExitData;
    case ErrorCode::kNumeric:
    case ErrorCode::kInternal:
      return kExitInternal;
  }
  return kExitInternal;
}

int Main(int argc, char** argv) {
  CLI::App app{"Semantic prior image codec"};
  app.require_subcommand(1);

  SynthArgs synth;
  CLI::App* synth_cmd =
      app.add_subcommand("synth-data", "Write synthetic scenes and maps");
  synth_cmd->add_option("--out", synth.out)->required();
  synth_cmd->add_option("--count", synth.count)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--size", synth.size)->check(CLI::Range(8, 4096));
  synth_cmd->add_option("--classes", synth.classes)->check(CLI::Range(1, 255));
  synth_cmd->add_option("--seed", synth.seed);

  TrainArgs train;
  CLI::App* train_cmd = app.add_subcommand("train", "Train a model");
  train_cmd->add_option("--config", train.config)->required();
  train_cmd->add_option("--out", train.out)->required();
  train_cmd->add_option("--data", train.data, "Overrides the dataset key");

  EncodeArgs encode;
  CLI::App* encode_cmd = app.add_subcommand("encode", "Encode an image");
  encode_cmd->add_option("--model", encode.model)->required();
  encode_cmd->add_option("--image", encode.image)->required();
  encode_cmd->add_option("--map", encode.map)->required();
  encode_cmd->add_option("--out", encode.out)->required();

  DecodeArgs decode;
  size_t swap_class = 0;
  CLI::App* decode_cmd = app.add_subcommand("decode", "Decode a container");
  decode_cmd->add_option("--model", decode.model)->required();
  decode_cmd->add_option("--in", decode.in)->required();
  decode_cmd->add_option("--out", decode.out)->required();
  CLI::Option* swap_opt = decode_cmd->add_option(
      "--swap-region", swap_class, "Take this class's prior from --ref");
  decode_cmd->add_option("--ref", decode.ref)->needs(swap_opt);

  InspectArgs inspect;
  CLI::App* inspect_cmd = app.add_subcommand("inspect", "Print a rate report");
  inspect_cmd->add_option("--in", inspect.in)->required();
  inspect_cmd->add_option("--model", inspect.model,
                          "Adds per-region bits");
  inspect_cmd->add_flag("--csv", inspect.csv);

  CorrArgs corr;
  CLI::App* corr_cmd =
      app.add_subcommand("analyze-corr", "Channel correlation of a class prior");
  corr_cmd->add_option("--model", corr.model);
  corr_cmd->add_option("--data", corr.data);
  corr_cmd->add_option("--class", corr.class_id);
  corr_cmd->add_option("--generator", corr.generator,
                       "correlated or independent synthetic priors");
  corr_cmd->add_option("--samples", corr.samples)->check(CLI::Range(2, 1000000));
  corr_cmd->add_option("--channels", corr.channels)->check(CLI::Range(2, 4096));
  corr_cmd->add_option("--seed", corr.seed);
  corr_cmd->add_option("--csv", corr.csv);
  corr_cmd->add_option("--pgm", corr.pgm);

  std::string ablate_config;
  CLI::App* ablate_cmd =
      app.add_subcommand("ablate", "Hyperprior versus factorized-only bits");
  ablate_cmd->add_option("--config", ablate_config)->required();

  uint64_t grad_seed = 1;
  int grad_points = 10;
  CLI::App* grad_cmd =
      app.add_subcommand("gradcheck", "Finite-difference gradient suites");
  grad_cmd->add_option("--seed", grad_seed);
  grad_cmd->add_option("--points", grad_points)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*synth_cmd) return RunSynth(synth);
    if (*train_cmd) return RunTrain(train);
    if (*encode_cmd) return RunEncode(encode);
    if (*decode_cmd) {
      if (*swap_opt) decode.swap_region = swap_class;
      return RunDecode(decode);
    }
    if (*inspect_cmd) return RunInspect(inspect);
    if (*corr_cmd) return RunCorr(corr);
    if (*ablate_cmd) return RunAblate(ablate_config);
    if (*grad_cmd) return RunGradcheck(grad_seed, grad_points);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ExitCodeFor(e);
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace
}  // namespace spc

int main(int argc, char** argv) { return spc::Main(argc, argv); }
