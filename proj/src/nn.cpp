/**
 * Copyright 2026 The earcough Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <algorithm>
#include <array>
#include <string>

#include "earcough/audio.hpp"
#include "earcough/error.hpp"
#include "earcough/nn/profile.hpp"
#include "earcough/nn/spec.hpp"

namespace earcough::nn {

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::Conv2d: return "conv2d";
    case LayerKind::Conv1d: return "conv1d";
    case LayerKind::MaxPool: return "maxpool";
    case LayerKind::GlobalAvgPool: return "global_avg_pool";
    case LayerKind::Dense: return "dense";
  }
  return "unknown";
}

std::size_t LayerSpec::weight_count() const {
  switch (kind) {
    case LayerKind::Conv2d:
    case LayerKind::Conv1d:
      return static_cast<std::size_t>(out_channels) * static_cast<std::size_t>(kernel) *
             static_cast<std::size_t>(in_channels);
    case LayerKind::Dense: return static_cast<std::size_t>(out_channels) * static_cast<std::size_t>(in_channels);
    default: return 0;
  }
}

std::size_t LayerSpec::bias_count() const { return has_params() ? static_cast<std::size_t>(out_channels) : 0; }

std::vector<Shape> ModelSpec::output_shapes() const {
  std::vector<Shape> out;
  Shape cur = input_shape();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    const std::string where = "layer " + std::to_string(i) + " (" + std::string(to_string(l.kind)) + ")";
    switch (l.kind) {
      case LayerKind::Conv2d:
      case LayerKind::Conv1d:
        if (l.in_channels != cur.channels) throw Error(Errc::InvalidArgument, where + ": channel mismatch");
        if (l.kernel < 1 || l.kernel % 2 == 0 || l.stride < 1 || l.out_channels < 1) {
          throw Error(Errc::InvalidArgument, where + ": kernel must be odd, stride and width positive");
        }
        cur = {l.out_channels, (cur.length + l.stride - 1) / l.stride};
        break;
      case LayerKind::MaxPool:
        if (l.pool < 1) throw Error(Errc::InvalidArgument, where + ": pool width must be positive");
        cur = {cur.channels, cur.length / l.pool};
        break;
      case LayerKind::GlobalAvgPool: cur = {cur.channels, 1}; break;
      case LayerKind::Dense:
        if (static_cast<std::size_t>(l.in_channels) != cur.size() || l.out_channels < 1) {
          throw Error(Errc::InvalidArgument, where + ": input width mismatch");
        }
        cur = {l.out_channels, 1};
        break;
    }
    if (cur.length < 1) throw Error(Errc::InvalidArgument, where + ": output length collapses to zero");
    out.push_back(cur);
  }
  return out;
}

std::size_t ModelSpec::param_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight_count() + l.bias_count();
  return n;
}

void ModelSpec::validate() const {
  using K = LayerKind;
  static constexpr std::array<K, 15> kPattern = {
      K::Conv2d, K::Conv1d, K::MaxPool, K::Conv1d, K::Conv1d,        K::MaxPool, K::Conv1d, K::Conv1d,
      K::MaxPool, K::Conv1d, K::Conv1d, K::GlobalAvgPool, K::Dense, K::Dense,   K::Dense,
  };
  if (input_length < 1) throw Error(Errc::InvalidArgument, "input length must be positive");
  if (layers.size() != kPattern.size()) {
    throw Error(Errc::InvalidArgument, "expected 4 convolution blocks and 3 dense layers (15 layers)");
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].kind != kPattern[i]) {
      throw Error(Errc::InvalidArgument, "layer " + std::to_string(i) + " should be " +
                                             std::string(to_string(kPattern[i])));
    }
  }
  if (layers.front().in_channels != 2) throw Error(Errc::InvalidArgument, "2-D convolution height must be 2");
  if (layers.back().out_channels != 2 || layers.back().relu) {
    throw Error(Errc::InvalidArgument, "final layer must be a linear 2-way read-out");
  }
  output_shapes();
}

ModelSpec make_spec(int sample_rate_hz, int input_length, const ArchConfig& a) {
  auto conv = [](LayerKind k, int in, int out, int kernel, int stride) {
    return LayerSpec{k, in, out, kernel, stride, 1, true};
  };
  auto pool = [](int c, int w) { return LayerSpec{LayerKind::MaxPool, c, c, 1, 1, w, false}; };
  auto dense = [](int in, int out, bool relu) { return LayerSpec{LayerKind::Dense, in, out, 1, 1, 1, relu}; };
  const auto& w = a.widths;
  ModelSpec s;
  s.sample_rate_hz = sample_rate_hz;
  s.input_length = input_length;
  s.layers = {
      conv(LayerKind::Conv2d, 2, w[0], a.first_kernel, a.first_stride),
      conv(LayerKind::Conv1d, w[0], w[0], a.kernel, 1),
      pool(w[0], a.pools[0]),
      conv(LayerKind::Conv1d, w[0], w[1], a.kernel, 1),
      conv(LayerKind::Conv1d, w[1], w[1], a.kernel, 1),
      pool(w[1], a.pools[1]),
      conv(LayerKind::Conv1d, w[1], w[2], a.kernel, 1),
      conv(LayerKind::Conv1d, w[2], w[2], a.kernel, 1),
      pool(w[2], a.pools[2]),
      conv(LayerKind::Conv1d, w[2], w[3], a.kernel, 1),
      conv(LayerKind::Conv1d, w[3], w[3], a.kernel, 1),
      LayerSpec{LayerKind::GlobalAvgPool, w[3], w[3], 1, 1, 1, false},
      dense(w[3], a.hidden[0], true),
      dense(a.hidden[0], a.hidden[1], true),
      dense(a.hidden[1], 2, false),
  };
  s.validate();
  return s;
}

ModelSpec default_spec(int sample_rate_hz) {
  if (!is_supported_rate(sample_rate_hz)) {
    throw Error(Errc::UnsupportedRate, "unsupported model rate " + std::to_string(sample_rate_hz));
  }
  return make_spec(sample_rate_hz, static_cast<int>(window_length(sample_rate_hz)), ArchConfig{});
}

ModelSpec reduced_spec() {
  ArchConfig a;
  a.first_kernel = 3;
  a.kernel = 3;
  a.widths = {4, 6, 8, 8};
  a.pools = {2, 2, 2};
  a.hidden = {8, 6};
  return make_spec(128, 64, a);
}

std::uint64_t layer_flops(const LayerSpec& l, const Shape& output) {
  const auto len = static_cast<std::uint64_t>(output.length);
  switch (l.kind) {
    case LayerKind::Conv2d:
    case LayerKind::Conv1d: return 2ull * len * l.weight_count();
    case LayerKind::Dense: return 2ull * l.weight_count();
    default: return 0;
  }
}

ResourceProfile profile(const ModelSpec& spec) {
  constexpr std::uint64_t kBytes = sizeof(float);
  const std::vector<Shape> shapes = spec.output_shapes();
  ResourceProfile p;
  std::uint64_t peak_pair = 0;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    LayerProfile lp{l.kind, shapes[i], layer_flops(l, shapes[i]), l.weight_count() + l.bias_count()};
    p.flops += lp.flops;
    p.param_count += lp.params;
    p.layers.push_back(lp);
    if (i + 1 < shapes.size()) peak_pair = std::max<std::uint64_t>(peak_pair, shapes[i].size() + shapes[i + 1].size());
  }
  if (shapes.size() == 1) peak_pair = shapes[0].size();
  p.param_bytes = p.param_count * kBytes;
  p.peak_activation_bytes = (spec.input_shape().size() + peak_pair) * kBytes;
  p.space_bytes = p.param_bytes + p.peak_activation_bytes;
  return p;
}

}  // namespace earcough::nn
