// src/frontend.cc

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

#include "lde/frontend.h"

#include <cmath>
#include <sstream>

#include "lde/error.h"

namespace lde {

Activation ParseActivation(const std::string &name) {
  if (name == "linear") return Activation::kLinear;
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  throw ArgumentError("unknown activation '" + name + "' (expected linear, relu or tanh)");
}

std::string ActivationName(Activation a) {
  switch (a) {
    case Activation::kLinear: return "linear";
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
  }
  return "?";
}

void ConvSpec::Validate() const {
  if (input_dim == 0) throw ArgumentError("ConvSpec: input_dim must be >= 1");
  if (kernel == 0 || kernel % 2 == 0) throw ArgumentError("ConvSpec: kernel must be odd");
  std::size_t channels = stem_channels > 0 ? stem_channels : input_dim;
  for (const auto &s : stages) {
    if (s.blocks == 0) throw ArgumentError("ConvSpec: a stage needs at least one block");
    if (s.channels < channels)
      throw ArgumentError("ConvSpec: stage channels may not decrease (" +
                          std::to_string(channels) + " -> " + std::to_string(s.channels) + ")");
    channels = s.channels;
  }
}

std::size_t ConvSpec::NumDownsamples() const {
  std::size_t n = 0;
  for (const auto &s : stages) n += s.downsample ? 1 : 0;
  return n;
}

std::size_t ConvSpec::OutputDim() const {
  if (!stages.empty()) return stages.back().channels;
  return stem_channels > 0 ? stem_channels : input_dim;
}

std::size_t ConvSpec::MinInputLength() const { return std::size_t{1} << NumDownsamples(); }

std::size_t ConvSpec::OutputLength(std::size_t input_length) const {
  std::size_t l = input_length;
  for (const auto &s : stages)
    if (s.downsample) l = (l + 1) / 2;
  return l;
}

std::string ConvSpec::StagesToString() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (i) os << ',';
    os << stages[i].channels << ':' << stages[i].blocks << ':'
       << (stages[i].downsample ? "ds" : "nods");
  }
  return os.str();
}

std::vector<StageSpec> ConvSpec::ParseStages(const std::string &text) {
  std::vector<StageSpec> out;
  if (text.empty() || text == "none") return out;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) {
    StageSpec s;
    std::istringstream it(item);
    std::string ch, bl, ds;
    if (!std::getline(it, ch, ':') || !std::getline(it, bl, ':') || !std::getline(it, ds) ||
        (ds != "ds" && ds != "nods"))
      throw ArgumentError("bad stage '" + item + "' (expected channels:blocks:ds|nods)");
    try {
      s.channels = std::stoul(ch);
      s.blocks = std::stoul(bl);
    } catch (const std::exception &) {
      throw ArgumentError("bad stage '" + item + "' (expected channels:blocks:ds|nods)");
    }
    s.downsample = ds == "ds";
    out.push_back(s);
  }
  return out;
}

Conv1d::Conv1d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
               std::size_t stride)
    : weight(Matrix(out_channels, in_channels * kernel)),
      bias(Matrix(out_channels, 1)),
      in_(in_channels),
      out_(out_channels),
      kernel_(kernel),
      stride_(stride) {}

namespace {

// Output positions tp with 0 <= tp*stride + offset < L, as [lo, hi).
void ValidRange(std::ptrdiff_t offset, std::size_t stride, std::size_t L, std::size_t out_len,
                std::size_t *lo, std::size_t *hi) {
  const auto s = static_cast<std::ptrdiff_t>(stride);
  std::ptrdiff_t first = offset >= 0 ? 0 : (-offset + s - 1) / s;
  std::ptrdiff_t last = (static_cast<std::ptrdiff_t>(L) - 1 - offset);
  last = last < 0 ? -1 : last / s;
  *lo = static_cast<std::size_t>(first);
  *hi = static_cast<std::size_t>(std::min<std::ptrdiff_t>(last + 1, out_len));
  if (*hi < *lo) *hi = *lo;
}

}  // namespace

// Column matrix of the convolution: row i*kernel + j holds input channel i
// read at tap j for every output position, zero outside the input.
Matrix Conv1d::Unfold(const Matrix &x) const {
  const std::size_t L = x.NumCols(), out_len = (L + stride_ - 1) / stride_;
  const auto pad = static_cast<std::ptrdiff_t>(kernel_ / 2);
  Matrix cols(in_ * kernel_, out_len);
  for (std::size_t i = 0; i < in_; ++i) {
    const double *xr = x.Row(i).data();
    for (std::size_t j = 0; j < kernel_; ++j) {
      const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(j) - pad;
      std::size_t lo, hi;
      ValidRange(off, stride_, L, out_len, &lo, &hi);
      double *dst = cols.Row(i * kernel_ + j).data();
      const double *src = xr + (static_cast<std::ptrdiff_t>(lo * stride_) + off);
      for (std::size_t t = lo; t < hi; ++t, src += stride_) dst[t] = *src;
    }
  }
  return cols;
}

Matrix Conv1d::Forward(const Matrix &x) const {
  if (x.NumRows() != in_)
    throw DimensionError("Conv1d: input has " + std::to_string(x.NumRows()) +
                         " channels, expected " + std::to_string(in_));
  Matrix y = MatMul(weight.value, Unfold(x));
  for (std::size_t o = 0; o < out_; ++o) {
    const double b = bias.value(o, 0);
    for (double &v : y.Row(o)) v += b;
  }
  return y;
}

Matrix Conv1d::Backward(const Matrix &x, const Matrix &grad_y) {
  const std::size_t L = x.NumCols(), out_len = (L + stride_ - 1) / stride_;
  if (x.NumRows() != in_ || grad_y.NumRows() != out_ || grad_y.NumCols() != out_len)
    throw ContractError("Conv1d::Backward: shapes do not match forward");
  for (std::size_t o = 0; o < out_; ++o) {
    double gb = 0.0;
    for (double g : grad_y.Row(o)) gb += g;
    bias.grad(o, 0) += gb;
  }
  AddScaled(&weight.grad, 1.0, MatMul(grad_y, Transpose(Unfold(x))));

  // Fold the column gradient back onto the input positions.
  const Matrix grad_cols = MatMul(Transpose(weight.value), grad_y);
  const auto pad = static_cast<std::ptrdiff_t>(kernel_ / 2);
  Matrix gx(in_, L);
  for (std::size_t i = 0; i < in_; ++i) {
    double *gxr = gx.Row(i).data();
    for (std::size_t j = 0; j < kernel_; ++j) {
      const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(j) - pad;
      std::size_t lo, hi;
      ValidRange(off, stride_, L, out_len, &lo, &hi);
      const double *src = grad_cols.Row(i * kernel_ + j).data();
      double *dst = gxr + (static_cast<std::ptrdiff_t>(lo * stride_) + off);
      for (std::size_t t = lo; t < hi; ++t, dst += stride_) *dst += src[t];
    }
  }
  return gx;
}

Matrix ApplyActivation(Activation a, const Matrix &x) {
  if (a == Activation::kLinear) return x;
  Matrix y = x;
  for (double &v : y.Data()) v = a == Activation::kRelu ? (v > 0.0 ? v : 0.0) : std::tanh(v);
  return y;
}

Matrix ActivationBackward(Activation a, const Matrix &pre, const Matrix &grad) {
  if (a == Activation::kLinear) return grad;
  Matrix g = grad;
  auto p = pre.Data();
  auto gd = g.Data();
  for (std::size_t i = 0; i < gd.size(); ++i) {
    if (a == Activation::kRelu) {
      if (!(p[i] > 0.0)) gd[i] = 0.0;
    } else {
      const double t = std::tanh(p[i]);
      gd[i] *= 1.0 - t * t;
    }
  }
  return g;
}

Frontend::Frontend(const ConvSpec &spec) : spec_(spec) {
  spec_.Validate();
  Build();
}

Frontend::Frontend(const ConvSpec &spec, Rng *rng) : Frontend(spec) {
  auto he = [rng](Conv1d &conv) {
    const double std = std::sqrt(2.0 / static_cast<double>(conv.in_channels() * conv.kernel()));
    conv.weight.value = RngGaussian(rng, conv.weight.value.NumRows(),
                                    conv.weight.value.NumCols(), 0.0, std);
  };
  if (spec_.stem_channels > 0) he(stem_);
  for (auto &b : blocks_) {
    he(b.conv1);
    he(b.conv2);
  }
}

void Frontend::Build() {
  std::size_t channels = spec_.input_dim;
  if (spec_.stem_channels > 0) {
    stem_ = Conv1d(spec_.input_dim, spec_.stem_channels, spec_.kernel, 1);
    channels = spec_.stem_channels;
  }
  blocks_.clear();
  for (const auto &stage : spec_.stages) {
    for (std::size_t b = 0; b < stage.blocks; ++b) {
      const std::size_t stride = (stage.downsample && b == 0) ? 2 : 1;
      ResidualBlock block;
      block.conv1 = Conv1d(channels, stage.channels, spec_.kernel, stride);
      block.conv2 = Conv1d(stage.channels, stage.channels, spec_.kernel, 1);
      blocks_.push_back(std::move(block));
      channels = stage.channels;
    }
  }
}

Matrix Frontend::Shortcut(const Matrix &x, std::size_t out_channels, std::size_t stride) const {
  if (stride == 1 && out_channels == x.NumRows()) return x;
  const std::size_t out_len = (x.NumCols() + stride - 1) / stride;
  Matrix y(out_channels, out_len);
  for (std::size_t c = 0; c < x.NumRows(); ++c)
    for (std::size_t t = 0; t < out_len; ++t) y(c, t) = x(c, t * stride);
  return y;
}

Matrix Frontend::ShortcutBackward(const Matrix &grad_y, std::size_t in_channels,
                                  std::size_t in_length, std::size_t stride) const {
  if (stride == 1 && grad_y.NumRows() == in_channels) return grad_y;
  Matrix g(in_channels, in_length);
  for (std::size_t c = 0; c < in_channels; ++c)
    for (std::size_t t = 0; t < grad_y.NumCols(); ++t) g(c, t * stride) = grad_y(c, t);
  return g;
}

FrontendOutput Frontend::Forward(const Matrix &x) const {
  if (x.NumRows() != spec_.input_dim)
    throw DimensionError("Frontend: input has " + std::to_string(x.NumRows()) +
                         " rows, expected " + std::to_string(spec_.input_dim));
  if (x.NumCols() < spec_.MinInputLength())
    throw LengthError("Frontend: input of " + std::to_string(x.NumCols()) +
                      " frames is shorter than the minimum of " +
                      std::to_string(spec_.MinInputLength()));
  FrontendOutput out;
  FrontendSaved &s = out.saved;
  s.input = x;
  Matrix h = spec_.stem_channels > 0 ? stem_.Forward(x) : x;
  s.stem_out = h;
  const Activation act = spec_.activation;
  for (const auto &b : blocks_) {
    s.block_in.push_back(h);
    Matrix h1 = b.conv1.Forward(ApplyActivation(act, h));
    Matrix h2 = b.conv2.Forward(ApplyActivation(act, h1));
    Matrix sc = Shortcut(h, b.conv1.out_channels(), b.conv1.stride());
    AddScaled(&sc, 1.0, h2);
    s.block_h1.push_back(std::move(h1));
    h = std::move(sc);
  }
  s.pre_final = h;
  out.y = spec_.HasLayers() ? ApplyActivation(act, h) : std::move(h);
  return out;
}

Matrix Frontend::Backward(const FrontendSaved &s, const Matrix &grad_y) {
  if (s.block_in.size() != blocks_.size() || !grad_y.SameShape(s.pre_final))
    throw ContractError("Frontend::Backward: saved state does not match this network");
  const Activation act = spec_.activation;
  Matrix g = spec_.HasLayers() ? ActivationBackward(act, s.pre_final, grad_y) : grad_y;
  for (std::size_t k = blocks_.size(); k-- > 0;) {
    ResidualBlock &b = blocks_[k];
    const Matrix &x = s.block_in[k];
    const Matrix &h1 = s.block_h1[k];
    Matrix g_a2 = b.conv2.Backward(ApplyActivation(act, h1), g);
    Matrix g_h1 = ActivationBackward(act, h1, g_a2);
    Matrix g_a1 = b.conv1.Backward(ApplyActivation(act, x), g_h1);
    Matrix gx = ActivationBackward(act, x, g_a1);
    AddScaled(&gx, 1.0, ShortcutBackward(g, x.NumRows(), x.NumCols(), b.conv1.stride()));
    g = std::move(gx);
  }
  if (spec_.stem_channels > 0) g = stem_.Backward(s.input, g);
  return g;
}

std::vector<std::pair<std::string, Param *>> Frontend::Params() {
  std::vector<std::pair<std::string, Param *>> out;
  if (spec_.stem_channels > 0) {
    out.emplace_back("frontend.stem.weight", &stem_.weight);
    out.emplace_back("frontend.stem.bias", &stem_.bias);
  }
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    const std::string p = "frontend.block" + std::to_string(k);
    out.emplace_back(p + ".conv1.weight", &blocks_[k].conv1.weight);
    out.emplace_back(p + ".conv1.bias", &blocks_[k].conv1.bias);
    out.emplace_back(p + ".conv2.weight", &blocks_[k].conv2.weight);
    out.emplace_back(p + ".conv2.bias", &blocks_[k].conv2.bias);
  }
  return out;
}

void Frontend::ZeroGrad() {
  for (auto &[name, p] : Params()) p->ZeroGrad();
}

}  // namespace lde
