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


#ifndef EARCOUGH_NN_PARAMS_HPP_
#define EARCOUGH_NN_PARAMS_HPP_

#include <Eigen/Core>

#include <cmath>
#include <vector>

#include "earcough/error.hpp"
#include "earcough/nn/spec.hpp"
#include "earcough/random.hpp"

namespace earcough::nn {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Convolution weights are (out, kernel * in) with column `tap * in + c`;
/// dense weights are (out, in).
template <typename Scalar>
struct LayerParams {
  Mat<Scalar> weight;
  Vec<Scalar> bias;
};

template <typename Scalar>
struct ModelParams {
  std::vector<LayerParams<Scalar>> layers;

  /// Zero-valued arrays shaped after `spec`; parameter-free layers get
  /// empty arrays.
  static ModelParams zeros(const ModelSpec& spec) {
    ModelParams p;
    p.layers.resize(spec.layers.size());
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
      const LayerSpec& l = spec.layers[i];
      if (!l.has_params()) continue;
      p.layers[i].weight = Mat<Scalar>::Zero(l.out_channels, static_cast<Eigen::Index>(l.weight_count() / l.out_channels));
      p.layers[i].bias = Vec<Scalar>::Zero(l.out_channels);
    }
    return p;
  }

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return n;
  }

  bool all_finite() const {
    for (const auto& l : layers) {
      if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
    }
    return true;
  }

  void set_zero() {
    for (auto& l : layers) {
      l.weight.setZero();
      l.bias.setZero();
    }
  }

  template <typename Other>
  ModelParams<Other> cast() const {
    ModelParams<Other> out;
    out.layers.resize(layers.size());
    for (std::size_t i = 0; i < layers.size(); ++i) {
      out.layers[i].weight = layers[i].weight.template cast<Other>();
      out.layers[i].bias = layers[i].bias.template cast<Other>();
    }
    return out;
  }

  /// Flat view in serialization order: per layer, weights row-major then bias.
  Vec<Scalar> flatten() const {
    Vec<Scalar> v(static_cast<Eigen::Index>(size()));
    Eigen::Index k = 0;
    for (const auto& l : layers) {
      for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
        v.segment(k, l.weight.cols()) = l.weight.row(r).transpose();
        k += l.weight.cols();
      }
      v.segment(k, l.bias.size()) = l.bias;
      k += l.bias.size();
    }
    return v;
  }

  void unflatten(const Vec<Scalar>& v) {
    if (static_cast<std::size_t>(v.size()) != size()) throw Error(Errc::ShapeMismatch, "flat parameter size");
    Eigen::Index k = 0;
    for (auto& l : layers) {
      for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
        l.weight.row(r) = v.segment(k, l.weight.cols()).transpose();
        k += l.weight.cols();
      }
      l.bias = v.segment(k, l.bias.size());
      k += l.bias.size();
    }
  }

  bool operator==(const ModelParams& o) const {
    if (layers.size() != o.layers.size()) return false;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const auto& a = layers[i];
      const auto& b = o.layers[i];
      if (a.weight.rows() != b.weight.rows() || a.weight.cols() != b.weight.cols() || a.bias.size() != b.bias.size()) {
        return false;
      }
      if (a.weight != b.weight || a.bias != b.bias) return false;
    }
    return true;
  }
};

/// Throws Error{ShapeMismatch} unless every array matches `spec`.
template <typename Scalar>
void check_shapes(const ModelSpec& spec, const ModelParams<Scalar>& params) {
  if (params.layers.size() != spec.layers.size()) throw Error(Errc::ShapeMismatch, "layer count differs from spec");
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    const auto& p = params.layers[i];
    const std::size_t w = static_cast<std::size_t>(p.weight.size());
    const std::size_t b = static_cast<std::size_t>(p.bias.size());
    const bool rows_ok = !l.has_params() || p.weight.rows() == l.out_channels;
    if (w != l.weight_count() || b != l.bias_count() || !rows_ok) {
      throw Error(Errc::ShapeMismatch, "parameters of layer " + std::to_string(i) + " do not match spec");
    }
  }
}

/// Fan-in scaled uniform weights, U(-sqrt(6/fan_in), +sqrt(6/fan_in)); zero biases.
template <typename Scalar>
ModelParams<Scalar> init_params(const ModelSpec& spec, Rng& rng) {
  ModelParams<Scalar> p = ModelParams<Scalar>::zeros(spec);
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    auto& w = p.layers[i].weight;
    if (w.size() == 0) continue;
    const double bound = std::sqrt(6.0 / static_cast<double>(w.cols()));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = static_cast<Scalar>(u(rng));
    }
  }
  return p;
}

}  // namespace earcough::nn

#endif  // EARCOUGH_NN_PARAMS_HPP_
