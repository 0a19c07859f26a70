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

#include "spc/codec.h"

#include <cstdio>
#include <sstream>

#include "spc/entropy_models.h"
#include "spc/error.h"
#include "spc/frozen_tables.h"
#include "spc/map_codec.h"
#include "spc/range_coder.h"

namespace spc {
namespace {

ModelConfig CodingConfig(const ModelConfig& config) {
  ModelConfig coding = config;
  coding.delta = CodingStep(config);
  return coding;
}

int32_t ToSymbol(int64_t q, const char* where) {
  if (q < INT32_MIN || q > INT32_MAX) {
    Fail(ErrorCode::kInvalidArgument, where, "quantized value exceeds 32 bits");
  }
  return static_cast<int32_t>(q);
}

std::vector<size_t> PresentClasses(const std::vector<bool>& presence) {
  std::vector<size_t> out;
  for (size_t n = 0; n < presence.size(); ++n) {
    if (presence[n]) out.push_back(n);
  }
  return out;
}

// Per-symbol tables, in coding order (present class major, channel minor).
struct SymbolPlan {
  std::vector<const CdfTable*> tables;
  std::vector<int64_t> offsets;
};

SymbolPlan HyperPlan(const std::vector<CdfTable>& tables,
                     const std::vector<size_t>& present) {
  SymbolPlan plan;
  for (size_t i = 0; i < present.size(); ++i) {
    for (const CdfTable& t : tables) {
      plan.tables.push_back(&t);
      plan.offsets.push_back(0);
    }
  }
  return plan;
}

SymbolPlan GaussianPlan(const GaussianParams& gp, GaussianTableBank& bank,
                        const std::vector<size_t>& present) {
  SymbolPlan plan;
  const size_t channels = gp.mean.dim(0);
  for (size_t n : present) {
    for (size_t c = 0; c < channels; ++c) {
      const FrozenGaussian f = bank.Freeze(gp.mean.at(c, n), gp.scale.at(c, n));
      plan.tables.push_back(f.table);
      plan.offsets.push_back(f.offset);
    }
  }
  return plan;
}

std::vector<int32_t> PlanSymbols(const Tensor& values, double step,
                                 const SymbolPlan& plan,
                                 const std::vector<size_t>& present) {
  std::vector<int32_t> symbols;
  const size_t rows = values.dim(0);
  size_t i = 0;
  for (size_t n : present) {
    for (size_t c = 0; c < rows; ++c, ++i) {
      symbols.push_back(ToSymbol(
          QuantizeIndex(values.at(c, n), step) - plan.offsets[i], "encode"));
    }
  }
  return symbols;
}

Tensor PlanValues(const std::vector<int32_t>& symbols, double step,
                  const SymbolPlan& plan, const std::vector<size_t>& present,
                  size_t rows, size_t classes) {
  Tensor values({rows, classes});
  size_t i = 0;
  for (size_t n : present) {
    for (size_t c = 0; c < rows; ++c, ++i) {
      values.at(c, n) =
          step * static_cast<double>(int64_t{symbols[i]} + plan.offsets[i]);
    }
  }
  return values;
}

[[noreturn]] void Mismatch(const std::string& what) {
  Fail(ErrorCode::kDataFormat, "decode", what);
}

}  // namespace

double CodingStep(const ModelConfig& config) {
  return static_cast<double>(static_cast<float>(config.delta));
}

EncodedPrior EncodePrior(const Model& model, const SemanticMap& map,
                         const SemanticPrior& prior) {
  const ModelConfig config = CodingConfig(model.config);
  config.Validate();
  const double step = config.delta;
  const size_t c = static_cast<size_t>(config.channels);
  Require(prior.channels() == c, "encode", "prior channel count mismatch");
  Require(prior.num_classes() == map.num_classes() &&
              map.num_classes() == static_cast<size_t>(config.num_classes),
          "encode", "class count mismatch between map, prior and model");
  Require(prior.presence() == map.Presence(), "encode",
          "prior presence does not match the map");
  Require(map.width() <= UINT32_MAX && map.height() <= UINT32_MAX, "encode",
          "image too large");

  EncodedPrior out;
  CodedImage& coded = out.coded;
  coded.width = static_cast<uint32_t>(map.width());
  coded.height = static_cast<uint32_t>(map.height());
  coded.num_classes = static_cast<uint16_t>(config.num_classes);
  coded.channels = static_cast<uint16_t>(c);
  coded.delta = static_cast<float>(model.config.delta);
  coded.presence = prior.presence();
  coded.map_segment = EncodeMap(map);

  const std::vector<size_t> present = PresentClasses(prior.presence());
  SymbolPlan prior_plan;
  if (config.variant == EntropyVariant::kFactorized) {
    const std::vector<CdfTable> tables = FreezeFactorizedTables(
        FactorizedDensity(kPriorDensityPrefix, c), model.params, step);
    prior_plan = HyperPlan(tables, present);
    const std::vector<int32_t> symbols =
        PlanSymbols(prior.vectors(), step, prior_plan, present);
    coded.prior_segment = EncodeSymbols(symbols, prior_plan.tables);
  } else {
    const Hyperprior hyper = HyperEncode(prior, model.params, config);
    const std::vector<CdfTable> hyper_tables = FreezeFactorizedTables(
        FactorizedDensity(kHyperDensityPrefix, static_cast<size_t>(config.hyper_channels())),
        model.params, step);
    const SymbolPlan hyper_plan = HyperPlan(hyper_tables, present);
    const std::vector<int32_t> hyper_symbols =
        PlanSymbols(hyper.latents, step, hyper_plan, present);
    coded.hyper_segment = EncodeSymbols(hyper_symbols, hyper_plan.tables);
    out.z_quantized = hyper.quantized;

    const GaussianParams gp = HyperDecode(hyper.quantized, model.params, config);
    GaussianTableBank bank(step);
    prior_plan = GaussianPlan(gp, bank, present);
    const std::vector<int32_t> symbols =
        PlanSymbols(prior.vectors(), step, prior_plan, present);
    coded.prior_segment = EncodeSymbols(symbols, prior_plan.tables);
  }
  Tensor t_tilde({c, prior.num_classes()});
  for (size_t n : present) {
    for (size_t k = 0; k < c; ++k) {
      t_tilde.at(k, n) =
          step * static_cast<double>(QuantizeIndex(prior.at(k, n), step));
    }
  }
  out.quantized = SemanticPrior(std::move(t_tilde), prior.presence());
  return out;
}

EncodedPrior EncodeImage(const Model& model, const Image& image,
                         const SemanticMap& map) {
  return EncodePrior(model, map,
                     ExtractPrior(image, map, model.params, model.config));
}

DecodedLayers DecodeLayers(const Model& model, const CodedImage& coded) {
  const ModelConfig config = CodingConfig(model.config);
  const double step = config.delta;
  const size_t c = static_cast<size_t>(config.channels);
  if (coded.channels != c ||
      coded.num_classes != static_cast<size_t>(config.num_classes)) {
    Mismatch("container shape does not match the model");
  }
  if (static_cast<double>(coded.delta) != step) {
    Mismatch("container quantization step does not match the model");
  }
  DecodedLayers out;
  out.map = DecodeMap(coded.map_segment);
  if (out.map.width() != coded.width || out.map.height() != coded.height ||
      out.map.num_classes() != coded.num_classes) {
    Mismatch("map segment does not match the container header");
  }
  if (out.map.Presence() != coded.presence) {
    Mismatch("presence bitmap does not match the map");
  }
  const std::vector<size_t> present = PresentClasses(coded.presence);
  const size_t classes = coded.num_classes;

  Tensor t_tilde;
  if (config.variant == EntropyVariant::kFactorized) {
    if (!coded.hyper_segment.empty()) {
      Mismatch("factorized model expects an empty hyperprior segment");
    }
    const std::vector<CdfTable> tables = FreezeFactorizedTables(
        FactorizedDensity(kPriorDensityPrefix, c), model.params, step);
    const SymbolPlan plan = HyperPlan(tables, present);
    t_tilde = PlanValues(DecodeSymbols(coded.prior_segment, plan.tables), step,
                         plan, present, c, classes);
  } else {
    const size_t h = static_cast<size_t>(config.hyper_channels());
    const std::vector<CdfTable> hyper_tables = FreezeFactorizedTables(
        FactorizedDensity(kHyperDensityPrefix, h), model.params, step);
    const SymbolPlan hyper_plan = HyperPlan(hyper_tables, present);
    out.z_quantized =
        PlanValues(DecodeSymbols(coded.hyper_segment, hyper_plan.tables), step,
                   hyper_plan, present, h, classes);
    const GaussianParams gp = HyperDecode(out.z_quantized, model.params, config);
    GaussianTableBank bank(step);
    const SymbolPlan plan = GaussianPlan(gp, bank, present);
    t_tilde = PlanValues(DecodeSymbols(coded.prior_segment, plan.tables), step,
                         plan, present, c, classes);
  }
  out.prior = SemanticPrior(std::move(t_tilde), coded.presence);
  return out;
}

Image Reconstruct(const Model& model, const DecodedLayers& layers) {
  return Synthesize(layers.prior, layers.map, model.params, model.config);
}

double RateReport::Bpp(size_t bytes) const {
  return 8.0 * static_cast<double>(bytes) / static_cast<double>(pixels());
}

RateReport MakeRateReport(const CodedImage& coded, const Model* model) {
  RateReport report;
  report.width = coded.width;
  report.height = coded.height;
  report.present_classes = coded.present_count();
  report.header_bytes = ContainerOverheadBytes(coded.num_classes);
  report.map_bytes = coded.map_segment.size();
  report.hyper_bytes = coded.hyper_segment.size();
  report.prior_bytes = coded.prior_segment.size();
  report.total_bytes = report.header_bytes + report.map_bytes +
                       report.hyper_bytes + report.prior_bytes;
  report.prior_symbols = size_t{coded.channels} * report.present_classes;
  const bool has_hyper = model != nullptr
                             ? model->config.variant == EntropyVariant::kHyperprior
                             : !coded.hyper_segment.empty();
  report.hyper_symbols =
      has_hyper ? size_t{coded.channels} / 16 * report.present_classes : 0;
  if (model == nullptr) return report;

  const DecodedLayers layers = DecodeLayers(*model, coded);
  const ModelConfig config = CodingConfig(model->config);
  const double step = config.delta;
  const size_t c = coded.channels;
  const std::vector<size_t> counts = layers.map.ClassCounts();
  std::vector<CdfTable> hyper_tables;
  std::vector<CdfTable> prior_tables;
  GaussianParams gp;
  if (config.variant == EntropyVariant::kFactorized) {
    prior_tables = FreezeFactorizedTables(FactorizedDensity(kPriorDensityPrefix, c),
                                          model->params, step);
  } else {
    hyper_tables = FreezeFactorizedTables(
        FactorizedDensity(kHyperDensityPrefix, c / 16), model->params, step);
    gp = HyperDecode(layers.z_quantized, model->params, config);
  }
  GaussianTableBank bank(step);
  for (size_t n : PresentClasses(coded.presence)) {
    RegionBits region;
    region.class_id = n;
    region.pixels = counts[n];
    for (size_t k = 0; k < hyper_tables.size(); ++k) {
      region.hyper_bits += hyper_tables[k].CostBits(
          QuantizeIndex(layers.z_quantized.at(k, n), step));
    }
    for (size_t k = 0; k < c; ++k) {
      const int64_t q = QuantizeIndex(layers.prior.at(k, n), step);
      if (prior_tables.empty()) {
        const FrozenGaussian f = bank.Freeze(gp.mean.at(k, n), gp.scale.at(k, n));
        region.prior_bits += f.table->CostBits(q - f.offset);
      } else {
        region.prior_bits += prior_tables[k].CostBits(q);
      }
    }
    report.regions.push_back(region);
  }
  return report;
}

std::string FormatRateReport(const RateReport& r) {
  std::ostringstream os;
  char line[160];
  auto row = [&](const char* name, size_t bytes) {
    std::snprintf(line, sizeof(line), "%-12s %10zu bytes %12.6f bpp\n", name,
                  bytes, r.Bpp(bytes));
    os << line;
  };
  std::snprintf(line, sizeof(line), "image        %zu x %zu, %zu classes present\n",
                r.width, r.height, r.present_classes);
  os << line;
  row("header", r.header_bytes);
  row("map", r.map_bytes);
  row("hyperprior", r.hyper_bytes);
  row("prior", r.prior_bytes);
  row("total", r.total_bytes);
  std::snprintf(line, sizeof(line), "symbols      prior %zu, hyperprior %zu\n",
                r.prior_symbols, r.hyper_symbols);
  os << line;
  for (const RegionBits& region : r.regions) {
    std::snprintf(line, sizeof(line),
                  "region %3zu   %8zu px  prior %9.2f bits  hyper %8.2f bits\n",
                  region.class_id, region.pixels, region.prior_bits,
                  region.hyper_bits);
    os << line;
  }
  return os.str();
}

std::string RateReportCsv(const RateReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "section,class,bytes,bits,bpp,symbols\r\n";
  auto row = [&](const char* name, size_t bytes, size_t symbols) {
    os << name << ",," << bytes << ',' << 8 * bytes << ',' << r.Bpp(bytes) << ','
       << symbols << "\r\n";
  };
  row("header", r.header_bytes, 0);
  row("map", r.map_bytes, r.pixels());
  row("hyperprior", r.hyper_bytes, r.hyper_symbols);
  row("prior", r.prior_bytes, r.prior_symbols);
  row("total", r.total_bytes, r.pixels() + r.hyper_symbols + r.prior_symbols);
  for (const RegionBits& region : r.regions) {
    const double bits = region.prior_bits + region.hyper_bits;
    os << "region," << region.class_id << ",," << bits << ','
       << bits / static_cast<double>(r.pixels()) << ',' << "\r\n";
  }
  return os.str();
}

}  // namespace spc
