// Copyright 2026 The TRIQA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "triqa/image.hpp"

// Minimal convolutional network: strided conv + ReLU stages, global average
// pooling and a linear projection, with hand-written backpropagation. All
// computation is single-threaded float32 through Eigen, so a given binary
// reproduces its outputs bit for bit.
namespace triqa::nn {

struct ConvSpec {
  int in_channels;
  int out_channels;
  int kernel;
  int stride;
  int padding;
};

struct BackboneSpec {
  std::vector<ConvSpec> convs;
  /// Output width of the projection head; 0 means no head (feature
  /// extractor only).
  int projection_dim = 0;

  int feature_dim() const { return convs.empty() ? 3 : convs.back().out_channels; }
  /// Product of strides; inputs must be at least this large per side.
  int total_stride() const;
  size_t parameter_count() const;
};

/// A named float32 tensor with its gradient accumulator.
struct Param {
  std::string name;
  std::vector<int> shape;
  std::vector<float> value;
  std::vector<float> grad;

  size_t size() const { return value.size(); }
};

/// Channel-major activations.
struct Tensor3 {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;
};

/// Converts 8-bit RGB into the normalized network input
/// ((x / 255 - 0.5) / 0.25 per channel).
Tensor3 to_input(const ImageBuffer& img);

/// Activations retained by a forward pass for backpropagation.
struct Tape {
  struct Layer {
    int out_h = 0;
    int out_w = 0;
    std::vector<float> columns;  // im2col of the layer input
    std::vector<float> output;   // post-ReLU
  };
  std::vector<Layer> layers;
  std::vector<float> pooled;
  std::vector<float> embedding;
};

class Network {
 public:
  Network() = default;
  /// He-normal initialization from `seed`; biases start at zero.
  Network(BackboneSpec spec, uint64_t seed);

  const BackboneSpec& spec() const { return spec_; }

  /// Global-average-pooled output of the last conv stage.
  std::vector<float> features(const Tensor3& input) const;

  /// Full forward pass; fills `tape` (pooled features and, when the network
  /// has a head, the embedding).
  void forward(const Tensor3& input, Tape& tape) const;

  /// Accumulates parameter gradients for d(loss)/d(embedding) into each
  /// Param::grad.
  void backward(const Tape& tape, std::span<const float> d_embedding);

  void zero_grad();

  std::vector<Param>& params() { return params_; }
  const std::vector<Param>& params() const { return params_; }

  /// Raw little-endian float32 bytes of every parameter, in order.
  std::string parameter_bytes() const;
  void load_parameter_bytes(std::string_view bytes);

 private:
  std::vector<float> run(const Tensor3& input, Tape* tape) const;

  BackboneSpec spec_;
  std::vector<Param> params_;  // conv weight/bias pairs, then head
};

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam() = default;
  Adam(const std::vector<Param>& params, AdamOptions options);

  /// One update with learning rate `lr` using the accumulated gradients
  /// scaled by `grad_scale`.
  void step(std::vector<Param>& params, double lr, double grad_scale = 1.0);

  int64_t steps() const { return t_; }

 private:
  AdamOptions options_;
  std::vector<std::vector<float>> m_;
  std::vector<std::vector<float>> v_;
  int64_t t_ = 0;
};

/// Cosine decay from `base` at step 0 to 0 at `total_steps`.
double cosine_lr(double base, int64_t step, int64_t total_steps);

}  // namespace triqa::nn
