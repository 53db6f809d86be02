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

#include "triqa/nn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numbers>

#include <Eigen/Core>

#include "triqa/errors.hpp"
#include "triqa/seeding.hpp"

namespace triqa::nn {

namespace {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;
using ConstVec = Eigen::Map<const Eigen::VectorXf>;
using MutVec = Eigen::Map<Eigen::VectorXf>;

int out_size(int in, const ConvSpec& c) {
  return (in + 2 * c.padding - c.kernel) / c.stride + 1;
}

void im2col(const float* x, int channels, int h, int w, const ConvSpec& c,
            int oh, int ow, float* col) {
  const int k = c.kernel;
  const size_t plane = static_cast<size_t>(oh) * ow;
  for (int ch = 0; ch < channels; ++ch) {
    const float* src = x + static_cast<size_t>(ch) * h * w;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        float* row = col + (static_cast<size_t>(ch) * k * k + ky * k + kx) * plane;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * c.stride - c.padding + ky;
          float* dst = row + static_cast<size_t>(oy) * ow;
          if (iy < 0 || iy >= h) {
            std::fill(dst, dst + ow, 0.0f);
            continue;
          }
          const float* line = src + static_cast<size_t>(iy) * w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * c.stride - c.padding + kx;
            dst[ox] = (ix >= 0 && ix < w) ? line[ix] : 0.0f;
          }
        }
      }
    }
  }
}

void col2im(const float* col, int channels, int h, int w, const ConvSpec& c,
            int oh, int ow, float* dx) {
  const int k = c.kernel;
  const size_t plane = static_cast<size_t>(oh) * ow;
  std::fill(dx, dx + static_cast<size_t>(channels) * h * w, 0.0f);
  for (int ch = 0; ch < channels; ++ch) {
    float* dst = dx + static_cast<size_t>(ch) * h * w;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const float* row = col + (static_cast<size_t>(ch) * k * k + ky * k + kx) * plane;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * c.stride - c.padding + ky;
          if (iy < 0 || iy >= h) continue;
          float* line = dst + static_cast<size_t>(iy) * w;
          const float* src = row + static_cast<size_t>(oy) * ow;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * c.stride - c.padding + kx;
            if (ix >= 0 && ix < w) line[ix] += src[ox];
          }
        }
      }
    }
  }
}

}  // namespace

int BackboneSpec::total_stride() const {
  int s = 1;
  for (const auto& c : convs) s *= c.stride;
  return s;
}

size_t BackboneSpec::parameter_count() const {
  size_t n = 0;
  for (const auto& c : convs) {
    n += static_cast<size_t>(c.out_channels) * c.in_channels * c.kernel * c.kernel +
         c.out_channels;
  }
  if (projection_dim > 0) {
    n += static_cast<size_t>(projection_dim) * feature_dim() + projection_dim;
  }
  return n;
}

Tensor3 to_input(const ImageBuffer& img) {
  Tensor3 t{3, img.height(), img.width(), {}};
  const size_t plane = static_cast<size_t>(img.height()) * img.width();
  t.data.resize(plane * 3);
  const auto px = img.data();
  for (size_t p = 0; p < plane; ++p) {
    for (int c = 0; c < 3; ++c) {
      t.data[c * plane + p] = (static_cast<float>(px[3 * p + c]) / 255.0f - 0.5f) * 4.0f;
    }
  }
  return t;
}

Network::Network(BackboneSpec spec, uint64_t seed) : spec_(std::move(spec)) {
  Rng rng(seed);
  int prev = 3;
  for (size_t i = 0; i < spec_.convs.size(); ++i) {
    const auto& c = spec_.convs[i];
    if (c.in_channels != prev) throw ConfigError("backbone channel mismatch at conv " + std::to_string(i));
    if (c.kernel <= 0 || c.stride <= 0 || c.padding < 0) throw ConfigError("invalid conv geometry");
    prev = c.out_channels;
    const int fan_in = c.in_channels * c.kernel * c.kernel;
    const double std = std::sqrt(2.0 / fan_in);
    Param w{"conv" + std::to_string(i) + ".weight",
            {c.out_channels, c.in_channels, c.kernel, c.kernel}, {}, {}};
    w.value.resize(static_cast<size_t>(c.out_channels) * fan_in);
    for (auto& v : w.value) v = static_cast<float>(std * rng.normal());
    Param b{"conv" + std::to_string(i) + ".bias", {c.out_channels},
            std::vector<float>(c.out_channels, 0.0f), {}};
    params_.push_back(std::move(w));
    params_.push_back(std::move(b));
  }
  if (spec_.projection_dim > 0) {
    const int fan_in = spec_.feature_dim();
    const double std = std::sqrt(1.0 / fan_in);
    Param w{"head.weight", {spec_.projection_dim, fan_in}, {}, {}};
    w.value.resize(static_cast<size_t>(spec_.projection_dim) * fan_in);
    for (auto& v : w.value) v = static_cast<float>(std * rng.normal());
    Param b{"head.bias", {spec_.projection_dim},
            std::vector<float>(spec_.projection_dim, 0.0f), {}};
    params_.push_back(std::move(w));
    params_.push_back(std::move(b));
  }
  for (auto& p : params_) p.grad.assign(p.value.size(), 0.0f);
}

std::vector<float> Network::run(const Tensor3& input, Tape* tape) const {
  if (input.channels != 3) throw UsageError("network input must have 3 channels");
  const int min_side = spec_.total_stride();
  if (input.height < min_side || input.width < min_side) {
    throw DataError("image " + std::to_string(input.height) + "x" +
                    std::to_string(input.width) +
                    " below the backbone minimum of " + std::to_string(min_side));
  }
  if (tape) tape->layers.assign(spec_.convs.size(), {});

  std::vector<float> x = input.data;
  int channels = input.channels, h = input.height, w = input.width;
  std::vector<float> columns;
  for (size_t i = 0; i < spec_.convs.size(); ++i) {
    const auto& c = spec_.convs[i];
    const int oh = out_size(h, c), ow = out_size(w, c);
    const int rows = c.in_channels * c.kernel * c.kernel;
    const int plane = oh * ow;
    columns.resize(static_cast<size_t>(rows) * plane);
    im2col(x.data(), channels, h, w, c, oh, ow, columns.data());

    std::vector<float> out(static_cast<size_t>(c.out_channels) * plane);
    const Param& weight = params_[2 * i];
    const Param& bias = params_[2 * i + 1];
    MutMap o(out.data(), c.out_channels, plane);
    o.noalias() = ConstMap(weight.value.data(), c.out_channels, rows) *
                  ConstMap(columns.data(), rows, plane);
    o.colwise() += ConstVec(bias.value.data(), c.out_channels);
    o = o.cwiseMax(0.0f);

    if (tape) {
      auto& layer = tape->layers[i];
      layer.out_h = oh;
      layer.out_w = ow;
      layer.columns = columns;
      layer.output = out;
    }
    x = std::move(out);
    channels = c.out_channels;
    h = oh;
    w = ow;
  }

  std::vector<float> pooled(channels);
  const size_t plane = static_cast<size_t>(h) * w;
  for (int c = 0; c < channels; ++c) {
    double sum = 0.0;
    const float* src = x.data() + c * plane;
    for (size_t p = 0; p < plane; ++p) sum += src[p];
    pooled[c] = static_cast<float>(sum / static_cast<double>(plane));
  }
  return pooled;
}

std::vector<float> Network::features(const Tensor3& input) const {
  return run(input, nullptr);
}

void Network::forward(const Tensor3& input, Tape& tape) const {
  tape.pooled = run(input, &tape);
  tape.embedding.clear();
  if (spec_.projection_dim > 0) {
    const Param& w = params_[params_.size() - 2];
    const Param& b = params_.back();
    tape.embedding.resize(spec_.projection_dim);
    // Plain loops keep the summation order independent of buffer alignment.
    const int feat = spec_.feature_dim();
    for (int r = 0; r < spec_.projection_dim; ++r) {
      const float* row = w.value.data() + static_cast<size_t>(r) * feat;
      double acc = 0.0;
      for (int k = 0; k < feat; ++k) acc += static_cast<double>(row[k]) * tape.pooled[k];
      tape.embedding[r] = static_cast<float>(acc) + b.value[r];
    }
  }
}

void Network::backward(const Tape& tape, std::span<const float> d_embedding) {
  if (spec_.projection_dim <= 0) throw UsageError("backward needs a projection head");
  if (static_cast<int>(d_embedding.size()) != spec_.projection_dim) {
    throw UsageError("embedding gradient has the wrong size");
  }
  if (tape.layers.size() != spec_.convs.size()) throw UsageError("tape does not match network");
  const int feat = spec_.feature_dim();
  const int proj = spec_.projection_dim;
  Param& hw = params_[params_.size() - 2];
  Param& hb = params_.back();
  const ConstVec de(d_embedding.data(), proj);
  const ConstVec pooled(tape.pooled.data(), feat);
  MutMap(hw.grad.data(), proj, feat).noalias() += de * pooled.transpose();
  MutVec(hb.grad.data(), proj) += de;
  std::vector<double> d_pooled(feat, 0.0);
  for (int r = 0; r < proj; ++r) {
    const float* row = hw.value.data() + static_cast<size_t>(r) * feat;
    for (int k = 0; k < feat; ++k) d_pooled[k] += static_cast<double>(row[k]) * de[r];
  }

  // Gradient w.r.t. the last stage output (before the ReLU mask).
  const auto& last = tape.layers.back();
  const size_t last_plane = static_cast<size_t>(last.out_h) * last.out_w;
  std::vector<float> grad(static_cast<size_t>(feat) * last_plane);
  for (int c = 0; c < feat; ++c) {
    const float g = static_cast<float>(d_pooled[c] / static_cast<double>(last_plane));
    for (size_t p = 0; p < last_plane; ++p) grad[c * last_plane + p] = g;
  }

  std::vector<float> d_columns;
  for (size_t i = spec_.convs.size(); i-- > 0;) {
    const auto& c = spec_.convs[i];
    const auto& layer = tape.layers[i];
    const int plane = layer.out_h * layer.out_w;
    const int rows = c.in_channels * c.kernel * c.kernel;
    for (size_t j = 0; j < grad.size(); ++j) {
      if (layer.output[j] <= 0.0f) grad[j] = 0.0f;
    }
    Param& weight = params_[2 * i];
    Param& bias = params_[2 * i + 1];
    const ConstMap d_out(grad.data(), c.out_channels, plane);
    MutMap(weight.grad.data(), c.out_channels, rows).noalias() +=
        d_out * ConstMap(layer.columns.data(), rows, plane).transpose();
    for (int r = 0; r < c.out_channels; ++r) {
      const float* src = grad.data() + static_cast<size_t>(r) * plane;
      double acc = 0.0;
      for (int p = 0; p < plane; ++p) acc += src[p];
      bias.grad[r] += static_cast<float>(acc);
    }
    if (i == 0) break;

    d_columns.resize(static_cast<size_t>(rows) * plane);
    MutMap(d_columns.data(), rows, plane).noalias() =
        ConstMap(weight.value.data(), c.out_channels, rows).transpose() * d_out;
    const auto& prev = tape.layers[i - 1];
    std::vector<float> d_in(static_cast<size_t>(c.in_channels) * prev.out_h * prev.out_w);
    col2im(d_columns.data(), c.in_channels, prev.out_h, prev.out_w, c, layer.out_h,
           layer.out_w, d_in.data());
    grad = std::move(d_in);
  }
}

void Network::zero_grad() {
  for (auto& p : params_) std::fill(p.grad.begin(), p.grad.end(), 0.0f);
}

std::string Network::parameter_bytes() const {
  static_assert(std::endian::native == std::endian::little,
                "parameter serialization assumes a little-endian host");
  std::string bytes;
  for (const auto& p : params_) {
    bytes.append(reinterpret_cast<const char*>(p.value.data()),
                 p.value.size() * sizeof(float));
  }
  return bytes;
}

void Network::load_parameter_bytes(std::string_view bytes) {
  size_t expected = 0;
  for (const auto& p : params_) expected += p.value.size() * sizeof(float);
  if (bytes.size() != expected) {
    throw DataError("parameter blob has " + std::to_string(bytes.size()) +
                    " bytes, network expects " + std::to_string(expected));
  }
  size_t offset = 0;
  for (auto& p : params_) {
    std::memcpy(p.value.data(), bytes.data() + offset, p.value.size() * sizeof(float));
    offset += p.value.size() * sizeof(float);
  }
}

Adam::Adam(const std::vector<Param>& params, AdamOptions options) : options_(options) {
  for (const auto& p : params) {
    m_.emplace_back(p.size(), 0.0f);
    v_.emplace_back(p.size(), 0.0f);
  }
}

void Adam::step(std::vector<Param>& params, double lr, double grad_scale) {
  if (params.size() != m_.size()) throw UsageError("optimizer/parameter mismatch");
  ++t_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const auto step_size = static_cast<float>(lr / c1);
  const auto sqrt_c2 = static_cast<float>(std::sqrt(c2));
  const auto eps = static_cast<float>(options_.eps);
  const auto scale = static_cast<float>(grad_scale);
  const auto fb1 = static_cast<float>(b1), fb2 = static_cast<float>(b2);
  for (size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    auto& m = m_[i];
    auto& v = v_[i];
    for (size_t j = 0; j < p.size(); ++j) {
      const float g = p.grad[j] * scale;
      m[j] = fb1 * m[j] + (1.0f - fb1) * g;
      v[j] = fb2 * v[j] + (1.0f - fb2) * g * g;
      p.value[j] -= step_size * m[j] / (std::sqrt(v[j]) / sqrt_c2 + eps);
    }
  }
}

double cosine_lr(double base, int64_t step, int64_t total_steps) {
  if (total_steps <= 0) return base;
  const double t = std::clamp(static_cast<double>(step) / static_cast<double>(total_steps), 0.0, 1.0);
  return 0.5 * base * (1.0 + std::cos(std::numbers::pi * t));
}

}  // namespace triqa::nn
