// src/config.cc

// Copyright 2026  The ldelid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.


#include "lde/config.h"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "lde/error.h"

namespace lde {

namespace {

std::size_t ToSize(const std::string &s) {
  std::size_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || s.empty())
    throw ConfigError("expected a non-negative integer, got '" + s + "'");
  return v;
}

double ToDouble(const std::string &s) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || s.empty() || !std::isfinite(v))
    throw ConfigError("expected a finite number, got '" + s + "'");
  return v;
}

bool ToBool(const std::string &s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw ConfigError("expected true or false, got '" + s + "'");
}

std::vector<std::string> SplitList(const std::string &s) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? std::string() : item.substr(b, e - b + 1));
  }
  if (s.back() == ',') out.emplace_back();
  return out;
}

std::string FromDouble(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string FromSize(std::size_t v) { return std::to_string(v); }
std::string FromBool(bool v) { return v ? "true" : "false"; }

std::vector<std::size_t> ToSizeList(const std::string &s) {
  std::vector<std::size_t> out;
  for (const auto &item : SplitList(s)) out.push_back(ToSize(item));
  return out;
}

std::vector<double> ToDoubleList(const std::string &s) {
  std::vector<double> out;
  for (const auto &item : SplitList(s)) out.push_back(ToDouble(item));
  return out;
}

template <typename T, typename F>
std::string JoinList(const std::vector<T> &v, F fmt) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + fmt(v[i]);
  return out;
}

std::string SmoothingName(SmoothingMode m) {
  return m == SmoothingMode::kSharedBeta ? "shared" : "per_component";
}

SmoothingMode ParseSmoothing(const std::string &s) {
  if (s == "shared") return SmoothingMode::kSharedBeta;
  if (s == "per_component") return SmoothingMode::kPerComponent;
  throw ConfigError("unknown smoothing '" + s + "' (expected shared or per_component)");
}

std::string AggregationName(AggregationMode m) {
  return m == AggregationMode::kMean ? "mean" : "normalized";
}

AggregationMode ParseAggregation(const std::string &s) {
  if (s == "mean") return AggregationMode::kMean;
  if (s == "normalized") return AggregationMode::kNormalized;
  throw ConfigError("unknown aggregation '" + s + "' (expected mean or normalized)");
}

std::string CenterInitName(CenterInit c) { return c == CenterInit::kZero ? "zero" : "uniform"; }

CenterInit ParseCenterInit(const std::string &s) {
  if (s == "zero") return CenterInit::kZero;
  if (s == "uniform") return CenterInit::kUniform;
  throw ConfigError("unknown center_init '" + s + "' (expected uniform or zero)");
}

std::string SdcName(const GmmBaselineConfig &g) {
  return FromSize(g.sdc_n) + "-" + FromSize(g.sdc_d) + "-" + FromSize(g.sdc_p) + "-" +
         FromSize(g.sdc_k);
}

void ParseSdc(const std::string &s, GmmBaselineConfig *g) {
  std::vector<std::size_t> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, '-')) v.push_back(ToSize(item));
  if (v.size() != 4) throw ConfigError("expected N-d-P-k, got '" + s + "'");
  g->sdc_n = v[0];
  g->sdc_d = v[1];
  g->sdc_p = v[2];
  g->sdc_k = v[3];
}

struct Field {
  const char *section;
  const char *key;
  std::function<void(RunConfig &, const std::string &)> set;
  std::function<std::string(const RunConfig &)> get;
};

#define LDE_SIZE(sec, key, member)                                  \
  Field {                                                           \
    sec, key, [](RunConfig &c, const std::string &v) { c.member = ToSize(v); }, \
        [](const RunConfig &c) { return FromSize(c.member); }       \
  }
#define LDE_DOUBLE(sec, key, member)                                    \
  Field {                                                               \
    sec, key, [](RunConfig &c, const std::string &v) { c.member = ToDouble(v); }, \
        [](const RunConfig &c) { return FromDouble(c.member); }         \
  }
#define LDE_BOOL(sec, key, member)                                    \
  Field {                                                             \
    sec, key, [](RunConfig &c, const std::string &v) { c.member = ToBool(v); }, \
        [](const RunConfig &c) { return FromBool(c.member); }         \
  }
#define LDE_SGD(sec, member)                                                           \
  LDE_DOUBLE(sec, "lr", member.lr), LDE_DOUBLE(sec, "momentum", member.momentum),      \
      LDE_DOUBLE(sec, "weight_decay", member.weight_decay),                            \
      LDE_SIZE(sec, "epochs", member.epochs),                                          \
      Field{sec, "milestones",                                                         \
            [](RunConfig &c, const std::string &v) { c.member.milestones = ToSizeList(v); }, \
            [](const RunConfig &c) { return JoinList(c.member.milestones, FromSize); }},     \
      Field {                                                                          \
    sec, "divisors",                                                                   \
        [](RunConfig &c, const std::string &v) { c.member.divisors = ToDoubleList(v); }, \
        [](const RunConfig &c) { return JoinList(c.member.divisors, FromDouble); }     \
  }

const std::vector<Field> &Fields() {
  static const std::vector<Field> fields = {
      Field{"paths", "data_dir", [](RunConfig &c, const std::string &v) { c.data_dir = v; },
            [](const RunConfig &c) { return c.data_dir; }},
      Field{"paths", "work_dir", [](RunConfig &c, const std::string &v) { c.work_dir = v; },
            [](const RunConfig &c) { return c.work_dir; }},

      LDE_SIZE("data", "num_classes", data.num_classes),
      LDE_SIZE("data", "feature_dim", data.feature_dim),
      LDE_SIZE("data", "num_phones", data.num_phones),
      LDE_SIZE("data", "num_train", data.num_train),
      LDE_SIZE("data", "num_test", data.num_test),
      LDE_SIZE("data", "num_dev", data.num_dev),
      LDE_SIZE("data", "min_length", data.min_length),
      LDE_SIZE("data", "max_length", data.max_length),
      LDE_DOUBLE("data", "center_spread", data.center_spread),
      LDE_DOUBLE("data", "class_shift", data.class_shift),
      LDE_DOUBLE("data", "self_loop", data.self_loop),
      LDE_DOUBLE("data", "noise_std", data.noise_std),
      LDE_SIZE("data", "seed", data.seed),

      LDE_SIZE("frontend", "stem_channels", model.frontend.stem_channels),
      Field{"frontend", "stages",
            [](RunConfig &c, const std::string &v) {
              c.model.frontend.stages = ConvSpec::ParseStages(v);
            },
            [](const RunConfig &c) { return c.model.frontend.StagesToString(); }},
      LDE_SIZE("frontend", "kernel", model.frontend.kernel),
      Field{"frontend", "activation",
            [](RunConfig &c, const std::string &v) {
              c.model.frontend.activation = ParseActivation(v);
            },
            [](const RunConfig &c) { return ActivationName(c.model.frontend.activation); }},

      Field{"model", "pooling",
            [](RunConfig &c, const std::string &v) { c.model.pooling = ParsePooling(v); },
            [](const RunConfig &c) { return PoolingName(c.model.pooling); }},
      LDE_SIZE("model", "num_components", model.lde.num_components),
      Field{"model", "smoothing",
            [](RunConfig &c, const std::string &v) { c.model.lde.smoothing = ParseSmoothing(v); },
            [](const RunConfig &c) { return SmoothingName(c.model.lde.smoothing); }},
      LDE_DOUBLE("model", "beta", model.lde.beta),
      Field{"model", "aggregation",
            [](RunConfig &c, const std::string &v) {
              c.model.lde.aggregation = ParseAggregation(v);
            },
            [](const RunConfig &c) { return AggregationName(c.model.lde.aggregation); }},
      LDE_BOOL("model", "length_normalize", model.lde.length_normalize),
      Field{"model", "center_init",
            [](RunConfig &c, const std::string &v) { c.model.center_init = ParseCenterInit(v); },
            [](const RunConfig &c) { return CenterInitName(c.model.center_init); }},
      LDE_BOOL("model", "freeze_centers", model.freeze_centers),

      LDE_SGD("train", train.sgd),
      LDE_SIZE("train", "batch_size", train.batch_size),
      LDE_SIZE("train", "crop_min", train.crop.crop_min),
      LDE_SIZE("train", "crop_max", train.crop.crop_max),
      LDE_SIZE("train", "seed", train.seed),
      LDE_SIZE("train", "smooth_window", train.smooth_window),

      Field{"gmm", "backend",
            [](RunConfig &c, const std::string &v) { c.gmm.backend = ParseGmmBackend(v); },
            [](const RunConfig &c) { return GmmBackendName(c.gmm.backend); }},
      LDE_SIZE("gmm", "num_components", gmm.num_components),
      LDE_SIZE("gmm", "em_iters", gmm.em_iters),
      LDE_SIZE("gmm", "frame_stride", gmm.frame_stride),
      LDE_BOOL("gmm", "use_sdc", gmm.use_sdc),
      Field{"gmm", "sdc", [](RunConfig &c, const std::string &v) { ParseSdc(v, &c.gmm); },
            [](const RunConfig &c) { return SdcName(c.gmm); }},
      LDE_BOOL("gmm", "sdc_static", gmm.sdc_static),
      LDE_SGD("gmm", gmm.classifier_sgd),
      LDE_SIZE("gmm", "batch_size", gmm.batch_size),
      LDE_SIZE("gmm", "seed", gmm.seed),
  };
  return fields;
}

#undef LDE_SIZE
#undef LDE_DOUBLE
#undef LDE_BOOL
#undef LDE_SGD

const Field *FindField(const std::string &section, const std::string &key) {
  for (const auto &f : Fields())
    if (section == f.section && key == f.key) return &f;
  return nullptr;
}

// Ties the model to the data it is trained on.
void SyncDerived(RunConfig *c) {
  c->model.frontend.input_dim = c->data.feature_dim;
  c->model.num_classes = c->data.num_classes;
}

}  // namespace

RunConfig::RunConfig() {
  // Desk recipe: the 90-epoch schedule scaled to 30 epochs.
  train.sgd.epochs = 30;
  train.sgd.milestones = {20, 27};
  train.sgd.divisors = {10.0, 100.0};
  SyncDerived(this);
}

void RunConfig::Validate() const {
  if (data_dir.empty()) throw ConfigError("paths.data_dir must not be empty");
  if (work_dir.empty()) throw ConfigError("paths.work_dir must not be empty");
  try {
    data.Validate();
    model.Validate();
    train.Validate();
    gmm.Validate();
  } catch (const ConfigError &) {
    throw;
  } catch (const Error &e) {
    throw ConfigError(e.what());
  }
  if (model.frontend.input_dim != data.feature_dim || model.num_classes != data.num_classes)
    throw ConfigError("model dimensions do not match the data section");
}

std::string RunConfig::TrainCorpusPath() const { return data_dir + "/train.corpus"; }
std::string RunConfig::TestCorpusPath() const { return data_dir + "/test.corpus"; }
std::string RunConfig::DevCorpusPath() const { return data_dir + "/dev.corpus"; }

RunConfig ParseRunConfig(const std::string &text, const std::string &context) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error &e) {
    throw ConfigError(context + ": line " + std::to_string(e.line()) + ": " + e.message());
  }
  RunConfig cfg;
  for (const auto &[section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError(context + ": key '" + section + "' outside a section");
    for (const auto &[key, node] : body) {
      const Field *f = FindField(section, key);
      if (f == nullptr) throw ConfigError(context + ": unknown key " + section + "." + key);
      try {
        f->set(cfg, node.data());
      } catch (const Error &e) {
        throw ConfigError(context + ": " + section + "." + key + ": " + e.what());
      }
    }
  }
  SyncDerived(&cfg);
  try {
    cfg.Validate();
  } catch (const Error &e) {
    throw ConfigError(context + ": " + e.what());
  }
  return cfg;
}

RunConfig ReadRunConfig(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseRunConfig(ss.str(), path);
}

std::string FormatRunConfig(const RunConfig &cfg) {
  std::string out;
  std::string section;
  for (const auto &f : Fields()) {
    if (section != f.section) {
      if (!section.empty()) out += "\n";
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += std::string(f.key) + " = " + f.get(cfg) + "\n";
  }
  return out;
}

}  // namespace lde
