// lde/frontend.h

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

#ifndef LDE_FRONTEND_H_
#define LDE_FRONTEND_H_

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "lde/matrix.h"
#include "lde/rng.h"

namespace lde {

enum class Activation { kLinear, kRelu, kTanh };

Activation ParseActivation(const std::string &name);
std::string ActivationName(Activation a);

struct StageSpec {
  std::size_t channels = 16;
  std::size_t blocks = 1;
  bool downsample = false;

  bool operator==(const StageSpec &) const = default;
};

// Shape of the 1-D residual front-end. Features are channels, time is the
// column axis. A stem convolution (omitted when stem_channels == 0) is
// followed by residual stages; a downsampling stage halves time in its first
// block with ceiling semantics.
struct ConvSpec {
  std::size_t input_dim = 20;
  std::size_t stem_channels = 16;
  std::vector<StageSpec> stages = {{16, 1, false}, {32, 1, true}};
  std::size_t kernel = 3;
  Activation activation = Activation::kRelu;

  void Validate() const;
  std::size_t NumDownsamples() const;
  std::size_t OutputDim() const;
  /// Smallest accepted input length, 2^NumDownsamples().
  std::size_t MinInputLength() const;
  std::size_t OutputLength(std::size_t input_length) const;
  bool HasLayers() const { return stem_channels > 0 || !stages.empty(); }

  /// Stage list as "channels:blocks:ds|nods,..." e.g. "16:1:nods,32:1:ds".
  std::string StagesToString() const;
  static std::vector<StageSpec> ParseStages(const std::string &text);

  bool operator==(const ConvSpec &) const = default;
};

// 1-D convolution with same padding (odd kernel) and stride 1 or 2.
// Output length is ceil(L / stride).
class Conv1d {
 public:
  Conv1d() = default;
  Conv1d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
         std::size_t stride);

  Matrix Forward(const Matrix &x) const;
  /// Accumulates weight/bias grads; returns dloss/dx.
  Matrix Backward(const Matrix &x, const Matrix &grad_y);

  std::size_t in_channels() const { return in_; }
  std::size_t out_channels() const { return out_; }
  std::size_t kernel() const { return kernel_; }
  std::size_t stride() const { return stride_; }

  Param weight;  // out x (in * kernel), tap j of input channel i at column i*kernel + j
  Param bias;    // out x 1

 private:
  Matrix Unfold(const Matrix &x) const;

  std::size_t in_ = 0, out_ = 0, kernel_ = 1, stride_ = 1;
};

Matrix ApplyActivation(Activation a, const Matrix &x);
/// grad * act'(pre), where pre is the activation's input.
Matrix ActivationBackward(Activation a, const Matrix &pre, const Matrix &grad);

// Pre-activation residual block:
//   y = shortcut(x) + conv2(act(conv1(act(x))))
// where the shortcut subsamples even frames when downsampling and zero-pads
// extra channels. With conv weights and biases at zero, y = shortcut(x).
struct ResidualBlock {
  Conv1d conv1;
  Conv1d conv2;
};

struct FrontendSaved {
  Matrix input;
  Matrix stem_out;
  std::vector<Matrix> block_in;  // input of each block
  std::vector<Matrix> block_h1;  // conv1 output of each block
  Matrix pre_final;              // input to the final activation
};

struct FrontendOutput {
  Matrix y;
  FrontendSaved saved;
};

class Frontend {
 public:
  Frontend() = default;
  /// Zero-initialized parameters.
  explicit Frontend(const ConvSpec &spec);
  /// He-normal convolution weights, zero biases.
  Frontend(const ConvSpec &spec, Rng *rng);

  /// Throws LengthError when x has fewer than MinInputLength() frames and
  /// DimensionError when its row count is not spec().input_dim.
  FrontendOutput Forward(const Matrix &x) const;
  Matrix Backward(const FrontendSaved &saved, const Matrix &grad_y);

  const ConvSpec &spec() const { return spec_; }
  std::vector<std::pair<std::string, Param *>> Params();
  void ZeroGrad();

  Conv1d &stem() { return stem_; }
  std::vector<ResidualBlock> &blocks() { return blocks_; }

 private:
  void Build();
  Matrix Shortcut(const Matrix &x, std::size_t out_channels, std::size_t stride) const;
  Matrix ShortcutBackward(const Matrix &grad_y, std::size_t in_channels,
                          std::size_t in_length, std::size_t stride) const;

  ConvSpec spec_;
  Conv1d stem_;
  std::vector<ResidualBlock> blocks_;
};

}  // namespace lde

#endif  // LDE_FRONTEND_H_
