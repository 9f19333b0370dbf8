// src/traindata.cc

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

#include "lde/traindata.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "lde/binary_io.h"
#include "lde/error.h"

namespace lde {

std::string BucketName(Bucket b) {
  switch (b) {
    case Bucket::kNone: return "none";
    case Bucket::kShort: return "short";
    case Bucket::kMedium: return "medium";
    case Bucket::kLong: return "long";
  }
  return "?";
}

std::size_t BucketFrames(Bucket b) {
  switch (b) {
    case Bucket::kShort: return 100;
    case Bucket::kMedium: return 400;
    case Bucket::kLong: return 1500;
    default: return 0;
  }
}

void SyntheticSpec::Validate() const {
  if (num_classes < 2) throw ArgumentError("SyntheticSpec: num_classes must be >= 2");
  if (feature_dim < 1) throw ArgumentError("SyntheticSpec: feature_dim must be >= 1");
  if (num_phones < 1) throw ArgumentError("SyntheticSpec: num_phones must be >= 1");
  if (min_length < 1 || min_length > max_length)
    throw ArgumentError("SyntheticSpec: need 1 <= min_length <= max_length");
  if (!(noise_std >= 0.0) || !(center_spread >= 0.0) || !(class_shift >= 0.0))
    throw ArgumentError("SyntheticSpec: spreads and noise must be non-negative");
  if (!(self_loop >= 0.0 && self_loop <= 1.0))
    throw ArgumentError("SyntheticSpec: self_loop must be in [0, 1]");
}

namespace {

std::size_t SampleCategorical(Rng *rng, std::span<const double> probs) {
  const double u = rng->Uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;
}

double MinPairDistance(const Matrix &centers, std::size_t upto) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a <= upto; ++a)
    for (std::size_t b = 0; b < a; ++b) {
      double s = 0.0;
      for (std::size_t d = 0; d < centers.NumCols(); ++d)
        s += (centers(a, d) - centers(b, d)) * (centers(a, d) - centers(b, d));
      best = std::min(best, std::sqrt(s));
    }
  return best;
}

ClassGenerator MakeClass(const SyntheticSpec &spec, const Matrix &inventory, Rng *rng) {
  const std::size_t G = spec.num_phones, D = spec.feature_dim;
  ClassGenerator gen;
  gen.centers = Matrix(G, D);
  for (std::size_t g = 0; g < G; ++g) {
    // Resample until this phone is farther than the noise std from the
    // phones already placed.
    int tries = 0;
    do {
      if (++tries > 1000)
        throw ArgumentError(
            "SyntheticSpec: cannot place phone centers farther apart than noise_std; "
            "increase center_spread or class_shift");
      for (std::size_t d = 0; d < D; ++d)
        gen.centers(g, d) = inventory(g, d) + spec.class_shift * rng->Gaussian();
    } while (g > 0 && !(MinPairDistance(gen.centers, g) > spec.noise_std));
  }
  gen.transitions = Matrix(G, G);
  for (std::size_t g = 0; g < G; ++g) {
    if (G == 1) {
      gen.transitions(0, 0) = 1.0;
      break;
    }
    double total = 0.0;
    for (std::size_t h = 0; h < G; ++h) {
      if (h == g) continue;
      gen.transitions(g, h) = -std::log(1.0 - rng->Uniform());
      total += gen.transitions(g, h);
    }
    for (std::size_t h = 0; h < G; ++h)
      gen.transitions(g, h) =
          h == g ? spec.self_loop : (1.0 - spec.self_loop) * gen.transitions(g, h) / total;
  }
  return gen;
}

FeatureSequence SampleSequence(const ClassGenerator &gen, double noise, std::size_t L,
                               Rng *rng) {
  const std::size_t G = gen.centers.NumRows(), D = gen.centers.NumCols();
  FeatureSequence x(D, L);
  std::size_t z = rng->UniformInt(G);
  for (std::size_t t = 0; t < L; ++t) {
    for (std::size_t d = 0; d < D; ++d) x(d, t) = gen.centers(z, d) + noise * rng->Gaussian();
    z = SampleCategorical(rng, gen.transitions.Row(z));
  }
  return x;
}

std::string MakeId(const char *prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s-%06zu", prefix, i);
  return buf;
}

}  // namespace

SyntheticCorpus GenerateCorpus(const SyntheticSpec &spec) {
  spec.Validate();
  const std::size_t K = spec.num_classes, D = spec.feature_dim;
  const Rng root(spec.seed);
  SyntheticCorpus out;

  Rng class_rng = root.Split("classes");
  Matrix inventory = RngGaussian(&class_rng, spec.num_phones, D, 0.0, spec.center_spread);
  for (std::size_t k = 0; k < K; ++k) out.classes.push_back(MakeClass(spec, inventory, &class_rng));

  for (Corpus *c : {&out.train, &out.test, &out.dev}) {
    c->num_classes = K;
    c->feature_dim = D;
  }

  const Rng train_root = root.Split("train");
  for (std::size_t i = 0; i < spec.num_train; ++i) {
    Rng rng = train_root.Split(i);
    Utterance u;
    u.id = MakeId("train", i);
    u.label = i % K;
    const auto L = static_cast<std::size_t>(rng.UniformRange(
        static_cast<std::int64_t>(spec.min_length), static_cast<std::int64_t>(spec.max_length)));
    u.features = SampleSequence(out.classes[u.label], spec.noise_std, L, &rng);
    out.train.utterances.push_back(std::move(u));
  }

  const Rng test_root = root.Split("test");
  for (std::size_t i = 0; i < spec.num_test; ++i) {
    Rng rng = test_root.Split(i);
    Utterance u;
    u.id = MakeId("test", i);
    u.label = i % K;
    u.bucket = static_cast<Bucket>(1 + (i / K) % 3);
    const std::size_t L = std::clamp(BucketFrames(u.bucket), spec.min_length, spec.max_length);
    u.features = SampleSequence(out.classes[u.label], spec.noise_std, L, &rng);
    out.test.utterances.push_back(std::move(u));
  }

  const Rng dev_root = root.Split("dev");
  if (spec.num_dev > 0 && spec.num_train == 0)
    throw ArgumentError("SyntheticSpec: dev crops need training utterances");
  for (std::size_t i = 0; i < spec.num_dev; ++i) {
    Rng rng = dev_root.Split(i);
    const Utterance &src = out.train.utterances[rng.UniformInt(spec.num_train)];
    Utterance u;
    u.id = MakeId("dev", i);
    u.label = src.label;
    u.bucket = static_cast<Bucket>(1 + i % 3);
    u.features = CropOrExtend(src.features, BucketFrames(u.bucket), &rng);
    out.dev.utterances.push_back(std::move(u));
  }
  return out;
}

FeatureSequence CropOrExtend(const FeatureSequence &x, std::size_t length, Rng *rng) {
  const std::size_t L = x.NumCols(), D = x.NumRows();
  if (L == 0) throw EmptySequenceError("CropOrExtend: empty utterance");
  if (length == L) return x;
  FeatureSequence out(D, length);
  std::size_t offset = 0;
  if (L > length) offset = static_cast<std::size_t>(rng->UniformInt(L - length + 1));
  for (std::size_t d = 0; d < D; ++d) {
    auto src = x.Row(d);
    auto dst = out.Row(d);
    if (L > length) {
      std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(offset), length, dst.begin());
    } else {
      for (std::size_t t = 0; t < length; ++t) dst[t] = src[t % L];
    }
  }
  return out;
}

FeatureSequence Sdc(const FeatureSequence &x, std::size_t n, std::size_t d, std::size_t p,
                    std::size_t k, bool append_static) {
  if (n == 0 || k == 0) throw ArgumentError("Sdc: N and k must be >= 1");
  if (x.NumRows() < n)
    throw DimensionError("Sdc: input dim " + std::to_string(x.NumRows()) + " < N = " +
                         std::to_string(n));
  const std::size_t span = 2 * d + (k - 1) * p;
  if (x.NumCols() <= span)
    throw LengthError("Sdc: need more than " + std::to_string(span) + " frames, got " +
                      std::to_string(x.NumCols()));
  const std::size_t out_len = x.NumCols() - span;
  const std::size_t base = append_static ? n : 0;
  FeatureSequence out(base + n * k, out_len);
  for (std::size_t o = 0; o < out_len; ++o) {
    const std::size_t t = o + d;  // centre frame of the first delta
    for (std::size_t j = 0; j < base; ++j) out(j, o) = x(j, t);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < n; ++j)
        out(base + i * n + j, o) = x(j, t + i * p + d) - x(j, t + i * p - d);
  }
  return out;
}

std::size_t CropPolicy::DrawLength(Rng *rng) const {
  if (crop_min < 1 || crop_min > crop_max)
    throw ArgumentError("CropPolicy: need 1 <= crop_min <= crop_max");
  return static_cast<std::size_t>(
      rng->UniformRange(static_cast<std::int64_t>(crop_min), static_cast<std::int64_t>(crop_max)));
}

BatchIterator::BatchIterator(std::span<const Utterance> utts, std::size_t batch_size,
                             CropPolicy policy, Rng rng)
    : utts_(utts), batch_size_(batch_size), policy_(policy), rng_(rng) {
  if (batch_size_ == 0) throw ArgumentError("BatchIterator: batch_size must be >= 1");
  order_.resize(utts_.size());
  pos_ = order_.size();
}

void BatchIterator::StartEpoch() {
  std::iota(order_.begin(), order_.end(), 0);
  Shuffle(&rng_, std::span<std::size_t>(order_));
  pos_ = 0;
}

std::size_t BatchIterator::StepsPerEpoch() const {
  return (utts_.size() + batch_size_ - 1) / batch_size_;
}

bool BatchIterator::Next(Batch *batch) {
  if (pos_ >= order_.size()) return false;
  const std::size_t end = std::min(order_.size(), pos_ + batch_size_);
  batch->length = policy_.DrawLength(&rng_);
  batch->features.clear();
  batch->labels.clear();
  batch->indices.clear();
  for (; pos_ < end; ++pos_) {
    const Utterance &u = utts_[order_[pos_]];
    batch->features.push_back(CropOrExtend(u.features, batch->length, &rng_));
    batch->labels.push_back(u.label);
    batch->indices.push_back(order_[pos_]);
  }
  return true;
}

namespace {
constexpr char kCorpusMagic[] = "LDEC";
constexpr std::uint32_t kCorpusVersion = 1;
}  // namespace

std::vector<char> SerializeCorpus(const Corpus &corpus) {
  io::Writer w;
  w.Tag(kCorpusMagic);
  w.U32(kCorpusVersion);
  w.U32(static_cast<std::uint32_t>(corpus.num_classes));
  w.U32(static_cast<std::uint32_t>(corpus.feature_dim));
  for (const auto &u : corpus.utterances) {
    if (u.features.NumRows() != corpus.feature_dim)
      throw DimensionError("WriteCorpus: utterance " + u.id + " has wrong feature dim");
    w.String(u.id);
    w.U32(static_cast<std::uint32_t>(u.label));
    w.U8(static_cast<std::uint8_t>(u.bucket));
    w.U32(static_cast<std::uint32_t>(u.features.NumCols()));
    w.U32(static_cast<std::uint32_t>(u.features.NumRows()));
    w.F64s(u.features.Data());
  }
  return w.buffer();
}

Corpus ParseCorpus(std::span<const char> data, const std::string &context) {
  io::Reader r(data, context);
  if (r.Bytes(4, "magic") != kCorpusMagic) throw FormatError(context + ": not a corpus file");
  const std::uint32_t version = r.U32("version");
  if (version != kCorpusVersion)
    throw FormatError(context + ": unsupported corpus version " + std::to_string(version));
  Corpus c;
  c.num_classes = r.U32("num_classes");
  c.feature_dim = r.U32("feature_dim");
  while (!r.AtEnd()) {
    Utterance u;
    u.id = r.String("utterance id");
    u.label = r.U32("label");
    const std::uint8_t bucket = r.U8("bucket");
    if (bucket > 3) throw FormatError(context + ": bad bucket tag in " + u.id);
    u.bucket = static_cast<Bucket>(bucket);
    const std::uint32_t L = r.U32("length"), D = r.U32("dim");
    if (D != c.feature_dim) throw FormatError(context + ": dim mismatch in " + u.id);
    if (u.label >= c.num_classes) throw FormatError(context + ": label out of range in " + u.id);
    r.Need(std::size_t{8} * L * D, "features");
    u.features = FeatureSequence(D, L);
    r.F64s(u.features.Data(), "features");
    c.utterances.push_back(std::move(u));
  }
  return c;
}

void WriteCorpus(const std::string &path, const Corpus &corpus) {
  io::WriteFile(path, SerializeCorpus(corpus));
}

Corpus ReadCorpus(const std::string &path) {
  std::vector<char> data = io::ReadFile(path);
  return ParseCorpus(data, path);
}

std::uint64_t CorpusChecksum(const Corpus &corpus) {
  return io::Fnv1a(SerializeCorpus(corpus));
}

}  // namespace lde
