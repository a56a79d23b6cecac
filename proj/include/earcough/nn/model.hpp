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


#ifndef EARCOUGH_NN_MODEL_HPP_
#define EARCOUGH_NN_MODEL_HPP_

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <string>
#include <vector>

#include "earcough/audio.hpp"
#include "earcough/error.hpp"
#include "earcough/nn/layers.hpp"
#include "earcough/nn/params.hpp"
#include "earcough/nn/spec.hpp"

namespace earcough::nn {

template <typename Scalar>
using Probs = Eigen::Matrix<Scalar, 2, 1>;

/// Output index 0 is the subject-cough probability.
enum class Target : int { subject_cough = 0, other = 1 };

namespace detail {

inline void check_input(const ModelSpec& spec, Eigen::Index rows, Eigen::Index cols) {
  if (rows != 2 || cols != spec.input_length) {
    throw Error(Errc::ShapeMismatch, "input is " + std::to_string(rows) + "x" + std::to_string(cols) +
                                         ", model expects 2x" + std::to_string(spec.input_length));
  }
}

template <typename Scalar>
void run_layer(const LayerSpec& l, const LayerParams<Scalar>& p, const ConstMatRef<Scalar>& x, MatRef<Scalar> y,
               Scalar* scratch, std::vector<Eigen::Index>* argmax) {
  switch (l.kind) {
    case LayerKind::Conv2d:
    case LayerKind::Conv1d: conv_forward<Scalar>(l, p, x, y, scratch); break;
    case LayerKind::MaxPool: maxpool_forward<Scalar>(l, x, y, argmax); break;
    case LayerKind::GlobalAvgPool: gap_forward<Scalar>(x, y); break;
    case LayerKind::Dense: dense_forward<Scalar>(l, p, x, y); break;
  }
}

inline std::size_t scratch_size(const ModelSpec& spec, const std::vector<Shape>& shapes) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    if (l.kind == LayerKind::Conv1d || l.kind == LayerKind::Conv2d) {
      n = std::max(n, static_cast<std::size_t>(l.in_channels * conv_padded_length(l, shapes[i].length)));
    }
  }
  return n;
}

}  // namespace detail

/// Inference with two ping-pong activation buffers sized once from the
/// spec; memory use is fixed after construction. Single-threaded.
template <typename Scalar>
class Executor {
 public:
  explicit Executor(ModelSpec spec) : spec_(std::move(spec)), shapes_(spec_.output_shapes()) {
    std::size_t cap = 0;
    for (const Shape& s : shapes_) cap = std::max(cap, s.size());
    for (auto& b : buffers_) b.resize(static_cast<Eigen::Index>(cap));
    scratch_.resize(detail::scratch_size(spec_, shapes_));
  }

  const ModelSpec& spec() const { return spec_; }

  Probs<Scalar> logits(const ModelParams<Scalar>& params, const ConstMatRef<Scalar>& input) {
    detail::check_input(spec_, input.rows(), input.cols());
    check_shapes(spec_, params);
    for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
      Eigen::Map<Mat<Scalar>> dst(buffers_[i % 2].data(), shapes_[i].channels, shapes_[i].length);
      if (i == 0) {
        detail::run_layer<Scalar>(spec_.layers[i], params.layers[i], input, dst, scratch_.data(), nullptr);
      } else {
        Eigen::Map<const Mat<Scalar>> src(buffers_[(i - 1) % 2].data(), shapes_[i - 1].channels,
                                          shapes_[i - 1].length);
        detail::run_layer<Scalar>(spec_.layers[i], params.layers[i], src, dst, scratch_.data(), nullptr);
      }
    }
    const std::size_t last = spec_.layers.size() - 1;
    return Eigen::Map<const Probs<Scalar>>(buffers_[last % 2].data());
  }

  Probs<Scalar> run(const ModelParams<Scalar>& params, const ConstMatRef<Scalar>& input) {
    return softmax2<Scalar>(logits(params, input));
  }

  /// Bytes held by activation buffers and the convolution scratch.
  std::size_t workspace_bytes() const {
    return (static_cast<std::size_t>(buffers_[0].size() + buffers_[1].size()) + scratch_.size()) * sizeof(Scalar);
  }

 private:
  ModelSpec spec_;
  std::vector<Shape> shapes_;
  std::array<Vec<Scalar>, 2> buffers_;
  std::vector<Scalar> scratch_;
};

/// Every activation of one forward pass, kept for backpropagation.
/// acts[0] is the input, acts[i + 1] the output of layer i.
template <typename Scalar>
struct ForwardCache {
  std::vector<Mat<Scalar>> acts;
  std::vector<std::vector<Eigen::Index>> argmax;
  std::vector<Scalar> scratch;
};

/// Single-buffer-per-layer forward pass. Returns the logits.
template <typename Scalar>
Probs<Scalar> forward_cached(const ModelSpec& spec, const ModelParams<Scalar>& params, const ConstMatRef<Scalar>& input,
                             ForwardCache<Scalar>& cache) {
  detail::check_input(spec, input.rows(), input.cols());
  check_shapes(spec, params);
  const std::vector<Shape> shapes = spec.output_shapes();
  cache.acts.resize(spec.layers.size() + 1);
  cache.argmax.resize(spec.layers.size());
  cache.scratch.resize(detail::scratch_size(spec, shapes));
  cache.acts[0] = input;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    cache.acts[i + 1].resize(shapes[i].channels, shapes[i].length);
    detail::run_layer<Scalar>(spec.layers[i], params.layers[i], cache.acts[i], cache.acts[i + 1],
                              cache.scratch.data(), &cache.argmax[i]);
  }
  return Eigen::Map<const Probs<Scalar>>(cache.acts.back().data());
}

template <typename Scalar>
Probs<Scalar> forward(const ModelSpec& spec, const ModelParams<Scalar>& params, const ConstMatRef<Scalar>& input) {
  Executor<Scalar> exec(spec);
  return exec.run(params, input);
}

/// Window data as a (2, L) column-major model input.
inline Mat<float> to_input(const DualChannelWindow& window) { return window.data; }

inline Probs<float> forward(const ModelSpec& spec, const ModelParams<float>& params, const DualChannelWindow& window) {
  return forward<float>(spec, params, to_input(window));
}

/// Adds weight * d loss / d params to `grad` and returns weight * loss,
/// where loss = -log p(label).
template <typename Scalar>
Scalar accumulate_gradient(const ModelSpec& spec, const ModelParams<Scalar>& params, const ConstMatRef<Scalar>& input,
                           Target label, Scalar weight, ModelParams<Scalar>& grad, ForwardCache<Scalar>& cache) {
  const Probs<Scalar> z = forward_cached<Scalar>(spec, params, input, cache);
  Probs<Scalar> dz;
  const Scalar loss = softmax_xent<Scalar>(z, static_cast<int>(label), &dz);
  Mat<Scalar> dcur = dz * weight;
  Mat<Scalar> dprev;
  for (std::size_t k = spec.layers.size(); k-- > 0;) {
    const LayerSpec& l = spec.layers[k];
    const Mat<Scalar>& x = cache.acts[k];
    const Mat<Scalar>& y = cache.acts[k + 1];
    Mat<Scalar>* dx = k == 0 ? nullptr : &dprev;
    switch (l.kind) {
      case LayerKind::Conv2d:
      case LayerKind::Conv1d:
        conv_backward<Scalar>(l, params.layers[k], x, y, dcur, dx, grad.layers[k], cache.scratch);
        break;
      case LayerKind::MaxPool:
        if (dx) maxpool_backward<Scalar>(x.cols(), cache.argmax[k], dcur, *dx);
        break;
      case LayerKind::GlobalAvgPool:
        if (dx) gap_backward<Scalar>(x.cols(), dcur, *dx);
        break;
      case LayerKind::Dense: dense_backward<Scalar>(l, params.layers[k], x, y, dcur, dx, grad.layers[k]); break;
    }
    if (dx) std::swap(dcur, dprev);
  }
  return weight * loss;
}

template <typename Scalar>
struct Gradient {
  ModelParams<Scalar> grads;
  Scalar loss = 0;
};

template <typename Scalar>
Gradient<Scalar> backward(const ModelSpec& spec, const ModelParams<Scalar>& params, const ConstMatRef<Scalar>& input,
                          Target label) {
  Gradient<Scalar> g{ModelParams<Scalar>::zeros(spec), Scalar(0)};
  ForwardCache<Scalar> cache;
  g.loss = accumulate_gradient<Scalar>(spec, params, input, label, Scalar(1), g.grads, cache);
  return g;
}

inline Gradient<float> backward(const ModelSpec& spec, const ModelParams<float>& params,
                                const DualChannelWindow& window, Target label) {
  return backward<float>(spec, params, to_input(window), label);
}

}  // namespace earcough::nn

#endif  // EARCOUGH_NN_MODEL_HPP_
