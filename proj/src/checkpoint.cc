// src/checkpoint.cc

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

#include "lde/checkpoint.h"

#include <map>

#include "lde/binary_io.h"
#include "lde/error.h"

namespace lde {

namespace {

constexpr char kMagic[8] = {'L', 'D', 'E', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

void WriteSgd(io::Writer *w, const SgdConfig &s) {
  w->F64(s.lr);
  w->F64(s.momentum);
  w->F64(s.weight_decay);
  w->U32(static_cast<std::uint32_t>(s.epochs));
  w->U32(static_cast<std::uint32_t>(s.milestones.size()));
  for (std::size_t i = 0; i < s.milestones.size(); ++i) {
    w->U32(static_cast<std::uint32_t>(s.milestones[i]));
    w->F64(s.divisors[i]);
  }
}

SgdConfig ReadSgd(io::Reader *r) {
  SgdConfig s;
  s.lr = r->F64("sgd lr");
  s.momentum = r->F64("sgd momentum");
  s.weight_decay = r->F64("sgd weight decay");
  s.epochs = r->U32("sgd epochs");
  const std::uint32_t n = r->U32("sgd milestones");
  s.milestones.clear();
  s.divisors.clear();
  for (std::uint32_t i = 0; i < n; ++i) {
    s.milestones.push_back(r->U32("milestone"));
    s.divisors.push_back(r->F64("divisor"));
  }
  return s;
}

void WriteModelSpec(io::Writer *w, const ModelSpec &m) {
  const ConvSpec &c = m.frontend;
  w->U32(static_cast<std::uint32_t>(c.input_dim));
  w->U32(static_cast<std::uint32_t>(c.stem_channels));
  w->U32(static_cast<std::uint32_t>(c.kernel));
  w->U8(static_cast<std::uint8_t>(c.activation));
  w->U32(static_cast<std::uint32_t>(c.stages.size()));
  for (const auto &s : c.stages) {
    w->U32(static_cast<std::uint32_t>(s.channels));
    w->U32(static_cast<std::uint32_t>(s.blocks));
    w->U8(s.downsample ? 1 : 0);
  }
  w->U8(static_cast<std::uint8_t>(m.pooling));
  w->U32(static_cast<std::uint32_t>(m.lde.num_components));
  w->U32(static_cast<std::uint32_t>(m.lde.feature_dim));
  w->U8(static_cast<std::uint8_t>(m.lde.smoothing));
  w->F64(m.lde.beta);
  w->U8(static_cast<std::uint8_t>(m.lde.aggregation));
  w->U8(m.lde.length_normalize ? 1 : 0);
  w->U32(static_cast<std::uint32_t>(m.num_classes));
  w->U8(static_cast<std::uint8_t>(m.center_init));
  w->U8(m.freeze_centers ? 1 : 0);
}

std::uint8_t ReadEnum(io::Reader *r, const char *what, std::uint8_t max) {
  const std::uint8_t v = r->U8(what);
  if (v > max) throw FormatError(r->context() + ": bad value for " + what);
  return v;
}

bool ReadBool(io::Reader *r, const char *what) { return ReadEnum(r, what, 1) == 1; }

ModelSpec ReadModelSpec(io::Reader *r) {
  ModelSpec m;
  ConvSpec &c = m.frontend;
  c.input_dim = r->U32("input dim");
  c.stem_channels = r->U32("stem channels");
  c.kernel = r->U32("kernel");
  c.activation = static_cast<Activation>(ReadEnum(r, "activation", 2));
  const std::uint32_t n = r->U32("stage count");
  c.stages.clear();
  for (std::uint32_t i = 0; i < n; ++i) {
    StageSpec s;
    s.channels = r->U32("stage channels");
    s.blocks = r->U32("stage blocks");
    s.downsample = ReadBool(r, "stage downsample");
    c.stages.push_back(s);
  }
  m.pooling = static_cast<PoolingKind>(ReadEnum(r, "pooling", 1));
  m.lde.num_components = r->U32("components");
  m.lde.feature_dim = r->U32("lde dim");
  m.lde.smoothing = static_cast<SmoothingMode>(ReadEnum(r, "smoothing", 1));
  m.lde.beta = r->F64("beta");
  m.lde.aggregation = static_cast<AggregationMode>(ReadEnum(r, "aggregation", 1));
  m.lde.length_normalize = ReadBool(r, "length normalize");
  m.num_classes = r->U32("classes");
  m.center_init = static_cast<CenterInit>(ReadEnum(r, "center init", 1));
  m.freeze_centers = ReadBool(r, "freeze centers");
  return m;
}

void WriteGmmConfig(io::Writer *w, const GmmBaselineConfig &g, std::size_t num_classes) {
  w->U8(static_cast<std::uint8_t>(g.backend));
  w->U32(static_cast<std::uint32_t>(g.num_components));
  w->U32(static_cast<std::uint32_t>(g.em_iters));
  w->U32(static_cast<std::uint32_t>(g.frame_stride));
  w->U8(g.use_sdc ? 1 : 0);
  w->U32(static_cast<std::uint32_t>(g.sdc_n));
  w->U32(static_cast<std::uint32_t>(g.sdc_d));
  w->U32(static_cast<std::uint32_t>(g.sdc_p));
  w->U32(static_cast<std::uint32_t>(g.sdc_k));
  w->U8(g.sdc_static ? 1 : 0);
  WriteSgd(w, g.classifier_sgd);
  w->U32(static_cast<std::uint32_t>(g.batch_size));
  w->U64(g.seed);
  w->U32(static_cast<std::uint32_t>(num_classes));
}

GmmBaselineConfig ReadGmmConfig(io::Reader *r, std::size_t *num_classes) {
  GmmBaselineConfig g;
  g.backend = static_cast<GmmBackend>(ReadEnum(r, "gmm backend", 1));
  g.num_components = r->U32("gmm components");
  g.em_iters = r->U32("em iters");
  g.frame_stride = r->U32("frame stride");
  g.use_sdc = ReadBool(r, "use sdc");
  g.sdc_n = r->U32("sdc n");
  g.sdc_d = r->U32("sdc d");
  g.sdc_p = r->U32("sdc p");
  g.sdc_k = r->U32("sdc k");
  g.sdc_static = ReadBool(r, "sdc static");
  g.classifier_sgd = ReadSgd(r);
  g.batch_size = r->U32("batch size");
  g.seed = r->U64("seed");
  *num_classes = r->U32("classes");
  return g;
}

void WriteGmm(io::Writer *w, const GmmModel &m) {
  w->U32(static_cast<std::uint32_t>(m.NumComponents()));
  w->U32(static_cast<std::uint32_t>(m.Dim()));
  w->F64s(m.weights());
  w->F64s(m.means().Data());
  w->F64s(m.variances().Data());
}

GmmModel ReadGmm(io::Reader *r) {
  const std::uint32_t c = r->U32("gmm size"), d = r->U32("gmm dim");
  r->Need(std::size_t{8} * c * (1 + 2 * std::size_t{d}), "gmm parameters");
  Vector weights(c);
  Matrix means(c, d), vars(c, d);
  r->F64s(weights, "gmm weights");
  r->F64s(means.Data(), "gmm means");
  r->F64s(vars.Data(), "gmm variances");
  try {
    return GmmModel(std::move(weights), std::move(means), std::move(vars));
  } catch (const ArgumentError &e) {
    throw FormatError(r->context() + ": invalid GMM: " + e.what());
  }
}

void WriteParams(io::Writer *w, const std::vector<std::pair<std::string, Param *>> &params) {
  w->U32(static_cast<std::uint32_t>(params.size()));
  for (const auto &[name, p] : params) {
    w->String(name);
    w->U32(static_cast<std::uint32_t>(p->value.NumRows()));
    w->U32(static_cast<std::uint32_t>(p->value.NumCols()));
    w->F64s(p->value.Data());
  }
}

void ReadParams(io::Reader *r, const std::vector<std::pair<std::string, Param *>> &params) {
  const std::uint32_t n = r->U32("parameter count");
  if (n != params.size())
    throw FormatError(r->context() + ": expected " + std::to_string(params.size()) +
                      " parameters, file has " + std::to_string(n));
  for (const auto &[name, p] : params) {
    const std::string got = r->String("parameter name");
    if (got != name)
      throw FormatError(r->context() + ": expected parameter " + name + ", found " + got);
    const std::uint32_t rows = r->U32("rows"), cols = r->U32("cols");
    if (rows != p->value.NumRows() || cols != p->value.NumCols())
      throw FormatError(r->context() + ": shape mismatch for " + name);
    r->F64s(p->value.Data(), name.c_str());
    p->ZeroGrad();
  }
}

void AddSection(io::Writer *out, const char *tag, const io::Writer &body) {
  out->Tag(std::string_view(tag, 4));
  out->U64(body.size());
  out->Bytes(body.buffer().data(), body.size());
}

}  // namespace

std::size_t Checkpoint::NumClasses() const {
  return kind == Kind::kNeural ? model.spec().num_classes : gmm.num_classes;
}

Vector Checkpoint::Scores(const FeatureSequence &x) const {
  return kind == Kind::kNeural ? model.Scores(x) : gmm.Scores(x);
}

std::vector<char> SerializeCheckpoint(const Checkpoint &ckpt) {
  io::Writer out;
  out.Bytes(kMagic, sizeof(kMagic));
  out.U32(kVersion);

  io::Writer conf;
  conf.String(ckpt.config_text);
  AddSection(&out, "CONF", conf);

  io::Writer arch, parm;
  arch.U8(static_cast<std::uint8_t>(ckpt.kind));
  if (ckpt.kind == Checkpoint::Kind::kNeural) {
    Model copy = ckpt.model;
    WriteModelSpec(&arch, copy.spec());
    WriteParams(&parm, copy.NamedParams());
    AddSection(&out, "ARCH", arch);
    AddSection(&out, "PARM", parm);
  } else {
    GmmBaseline copy = ckpt.gmm;
    WriteGmmConfig(&arch, copy.config, copy.num_classes);
    io::Writer gmms;
    if (copy.config.backend == GmmBackend::kSupervector) {
      WriteParams(&parm, {{"classifier.weight", &copy.classifier.weight},
                          {"classifier.bias", &copy.classifier.bias}});
      WriteGmm(&gmms, copy.ubm);
    } else {
      WriteParams(&parm, {});
      for (const auto &m : copy.class_models) WriteGmm(&gmms, m);
    }
    AddSection(&out, "ARCH", arch);
    AddSection(&out, "PARM", parm);
    AddSection(&out, "GMMS", gmms);
  }

  io::Writer rng;
  rng.U64(ckpt.rng_key);
  rng.U64(ckpt.rng_counter);
  AddSection(&out, "RNG_", rng);
  io::Writer epch;
  epch.U64(ckpt.epoch);
  AddSection(&out, "EPCH", epch);
  return out.buffer();
}

Checkpoint ParseCheckpoint(std::span<const char> data, const std::string &context) {
  io::Reader r(data, context);
  if (r.Remaining() < sizeof(kMagic) ||
      r.Bytes(sizeof(kMagic), "magic") != std::string(kMagic, sizeof(kMagic)))
    throw FormatError(context + ": not a checkpoint (bad magic)");
  const std::uint32_t version = r.U32("version");
  if (version != kVersion)
    throw FormatError(context + ": unsupported checkpoint version " + std::to_string(version));

  std::map<std::string, std::span<const char>> sections;
  std::size_t offset = sizeof(kMagic) + 4;
  while (!r.AtEnd()) {
    std::string tag = r.Bytes(4, "section tag");
    const std::uint64_t len = r.U64("section length");
    offset += 12;
    r.Need(len, "section payload");
    if (sections.count(tag)) throw FormatError(context + ": duplicate section " + tag);
    sections[tag] = data.subspan(offset, len);
    r.Bytes(len, "section payload");
    offset += len;
  }
  auto section = [&](const char *tag) {
    auto it = sections.find(tag);
    if (it == sections.end()) throw FormatError(context + ": missing section " + tag);
    return io::Reader(it->second, context + " [" + tag + "]");
  };
  auto finish = [&](io::Reader &sr) {
    if (!sr.AtEnd()) throw FormatError(sr.context() + ": trailing bytes");
  };

  Checkpoint ckpt;
  io::Reader conf = section("CONF");
  ckpt.config_text = conf.String("config text");
  finish(conf);

  io::Reader arch = section("ARCH");
  ckpt.kind = static_cast<Checkpoint::Kind>(ReadEnum(&arch, "kind", 1));
  io::Reader parm = section("PARM");
  std::size_t expected = 5;
  if (ckpt.kind == Checkpoint::Kind::kNeural) {
    ModelSpec spec = ReadModelSpec(&arch);
    finish(arch);
    try {
      ckpt.model = Model(spec);
    } catch (const Error &e) {
      throw FormatError(context + ": invalid architecture: " + e.what());
    }
    ReadParams(&parm, ckpt.model.NamedParams());
    finish(parm);
  } else {
    expected = 6;
    GmmBaseline &g = ckpt.gmm;
    g.config = ReadGmmConfig(&arch, &g.num_classes);
    finish(arch);
    io::Reader gmms = section("GMMS");
    if (g.config.backend == GmmBackend::kSupervector) {
      g.ubm = ReadGmm(&gmms);
      g.classifier = LinearClassifier(g.num_classes, g.ubm.NumComponents() * g.ubm.Dim());
      ReadParams(&parm, {{"classifier.weight", &g.classifier.weight},
                         {"classifier.bias", &g.classifier.bias}});
    } else {
      for (std::size_t k = 0; k < g.num_classes; ++k) g.class_models.push_back(ReadGmm(&gmms));
      ReadParams(&parm, {});
    }
    finish(gmms);
    finish(parm);
  }

  io::Reader rng = section("RNG_");
  ckpt.rng_key = rng.U64("rng key");
  ckpt.rng_counter = rng.U64("rng counter");
  finish(rng);
  io::Reader epch = section("EPCH");
  ckpt.epoch = epch.U64("epoch");
  finish(epch);
  if (sections.size() != expected) throw FormatError(context + ": unexpected extra section");
  return ckpt;
}

void SaveCheckpoint(const std::string &path, const Checkpoint &ckpt) {
  io::WriteFile(path, SerializeCheckpoint(ckpt));
}

Checkpoint LoadCheckpoint(const std::string &path) {
  std::vector<char> data = io::ReadFile(path);
  return ParseCheckpoint(data, path);
}

}  // namespace lde
