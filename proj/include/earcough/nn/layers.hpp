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


#ifndef EARCOUGH_NN_LAYERS_HPP_
#define EARCOUGH_NN_LAYERS_HPP_

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <vector>

#include "earcough/nn/params.hpp"
#include "earcough/nn/spec.hpp"

namespace earcough::nn {

template <typename Scalar>
using MatRef = Eigen::Ref<Mat<Scalar>>;
template <typename Scalar>
using ConstMatRef = Eigen::Ref<const Mat<Scalar>>;

/// Padded length a "same" convolution needs for `out_len` outputs.
inline Eigen::Index conv_padded_length(const LayerSpec& l, Eigen::Index out_len) {
  return (out_len - 1) * l.stride + l.kernel;
}

namespace detail {

// Columns of the padded input form the (kernel * in, out_len) patch matrix
// directly: column t starts at padded column t * stride and spans `kernel`
// consecutive (contiguous) input columns.
template <typename Scalar>
using PatchMap = Eigen::Map<const Mat<Scalar>, 0, Eigen::OuterStride<>>;

template <typename Scalar>
Eigen::Map<Mat<Scalar>> pad_input(const LayerSpec& l, const ConstMatRef<Scalar>& x, Eigen::Index out_len,
                                  Scalar* scratch) {
  const Eigen::Index in = l.in_channels;
  const Eigen::Index padded_len = conv_padded_length(l, out_len);
  const Eigen::Index left = (l.kernel - 1) / 2;
  Eigen::Map<Mat<Scalar>> xp(scratch, in, padded_len);
  xp.setZero();
  const Eigen::Index copy = std::min<Eigen::Index>(x.cols(), padded_len - left);
  xp.middleCols(left, copy) = x.leftCols(copy);
  return xp;
}

}  // namespace detail

/// `y` must be pre-sized to (out_channels, ceil(in_len / stride)); `scratch`
/// must hold in_channels * conv_padded_length(l, y.cols()) values.
template <typename Scalar>
void conv_forward(const LayerSpec& l, const LayerParams<Scalar>& p, const ConstMatRef<Scalar>& x, MatRef<Scalar> y,
                  Scalar* scratch) {
  const Eigen::Index in = l.in_channels;
  const Eigen::Index out_len = y.cols();
  auto xp = detail::pad_input<Scalar>(l, x, out_len, scratch);
  detail::PatchMap<Scalar> patches(xp.data(), in * l.kernel, out_len, Eigen::OuterStride<>(in * l.stride));
  y.noalias() = p.weight * patches;
  y.colwise() += p.bias;
  if (l.relu) y = y.cwiseMax(Scalar(0));
}

/// Gradient of a convolution given its input `x`, post-activation output `y`
/// and upstream gradient `dy`. Accumulates into `grad`; writes `dx` if given.
template <typename Scalar>
void conv_backward(const LayerSpec& l, const LayerParams<Scalar>& p, const ConstMatRef<Scalar>& x,
                   const ConstMatRef<Scalar>& y, const ConstMatRef<Scalar>& dy, Mat<Scalar>* dx,
                   LayerParams<Scalar>& grad, std::vector<Scalar>& scratch) {
  const Eigen::Index in = l.in_channels;
  const Eigen::Index out_len = y.cols();
  const Eigen::Index padded_len = conv_padded_length(l, out_len);
  const Eigen::Index left = (l.kernel - 1) / 2;
  const Eigen::Index patch_rows = in * l.kernel;
  scratch.resize(static_cast<std::size_t>(in * padded_len));

  Mat<Scalar> dz = dy;
  if (l.relu) dz = (y.array() > Scalar(0)).select(dz, Scalar(0));

  auto xp = detail::pad_input<Scalar>(l, x, out_len, scratch.data());
  detail::PatchMap<Scalar> patches(xp.data(), patch_rows, out_len, Eigen::OuterStride<>(in * l.stride));
  grad.weight.noalias() += dz * patches.transpose();
  grad.bias += dz.rowwise().sum();

  if (dx == nullptr) return;
  const Mat<Scalar> dpatch = p.weight.transpose() * dz;
  Mat<Scalar> dxp = Mat<Scalar>::Zero(in, padded_len);
  for (Eigen::Index t = 0; t < out_len; ++t) {
    Eigen::Map<Vec<Scalar>>(dxp.data() + t * l.stride * in, patch_rows) += dpatch.col(t);
  }
  dx->setZero(in, x.cols());
  const Eigen::Index copy = std::min<Eigen::Index>(x.cols(), padded_len - left);
  dx->leftCols(copy) = dxp.middleCols(left, copy);
}

/// Non-overlapping max over `pool` columns; trailing columns are dropped.
/// The first maximum wins ties. `argmax` (optional) receives the source
/// column of each output.
template <typename Scalar>
void maxpool_forward(const LayerSpec& l, const ConstMatRef<Scalar>& x, MatRef<Scalar> y,
                     std::vector<Eigen::Index>* argmax) {
  const Eigen::Index c = x.rows();
  const Eigen::Index out_len = y.cols();
  if (argmax != nullptr) argmax->resize(static_cast<std::size_t>(c * out_len));
  for (Eigen::Index t = 0; t < out_len; ++t) {
    for (Eigen::Index ch = 0; ch < c; ++ch) {
      Eigen::Index best = t * l.pool;
      Scalar v = x(ch, best);
      for (Eigen::Index j = 1; j < l.pool; ++j) {
        const Scalar u = x(ch, t * l.pool + j);
        if (u > v) {
          v = u;
          best = t * l.pool + j;
        }
      }
      y(ch, t) = v;
      if (argmax != nullptr) (*argmax)[static_cast<std::size_t>(t * c + ch)] = best;
    }
  }
}

template <typename Scalar>
void maxpool_backward(Eigen::Index in_len, const std::vector<Eigen::Index>& argmax, const ConstMatRef<Scalar>& dy,
                      Mat<Scalar>& dx) {
  const Eigen::Index c = dy.rows();
  dx.setZero(c, in_len);
  for (Eigen::Index t = 0; t < dy.cols(); ++t) {
    for (Eigen::Index ch = 0; ch < c; ++ch) dx(ch, argmax[static_cast<std::size_t>(t * c + ch)]) += dy(ch, t);
  }
}

template <typename Scalar>
void gap_forward(const ConstMatRef<Scalar>& x, MatRef<Scalar> y) {
  y.col(0) = x.rowwise().mean();
}

template <typename Scalar>
void gap_backward(Eigen::Index in_len, const ConstMatRef<Scalar>& dy, Mat<Scalar>& dx) {
  dx = (dy.col(0) / static_cast<Scalar>(in_len)).replicate(1, in_len);
}

/// Dense layer on a column vector (the flattened input).
template <typename Scalar>
void dense_forward(const LayerSpec& l, const LayerParams<Scalar>& p, const ConstMatRef<Scalar>& x, MatRef<Scalar> y) {
  y.col(0).noalias() = p.weight * Eigen::Map<const Vec<Scalar>>(x.data(), x.size());
  y.col(0) += p.bias;
  if (l.relu) y = y.cwiseMax(Scalar(0));
}

template <typename Scalar>
void dense_backward(const LayerSpec& l, const LayerParams<Scalar>& p, const ConstMatRef<Scalar>& x,
                    const ConstMatRef<Scalar>& y, const ConstMatRef<Scalar>& dy, Mat<Scalar>* dx,
                    LayerParams<Scalar>& grad) {
  Vec<Scalar> dz = dy.col(0);
  if (l.relu) dz = (y.col(0).array() > Scalar(0)).select(dz, Scalar(0));
  const Eigen::Map<const Vec<Scalar>> xv(x.data(), x.size());
  grad.weight.noalias() += dz * xv.transpose();
  grad.bias += dz;
  if (dx == nullptr) return;
  const Vec<Scalar> flat = p.weight.transpose() * dz;
  *dx = Eigen::Map<const Mat<Scalar>>(flat.data(), x.rows(), x.cols());
}

template <typename Scalar>
Eigen::Matrix<Scalar, 2, 1> softmax2(const Eigen::Matrix<Scalar, 2, 1>& z) {
  const Scalar m = z.maxCoeff();
  Eigen::Matrix<Scalar, 2, 1> e = (z.array() - m).exp().matrix();
  return e / e.sum();
}

/// Cross-entropy of softmax(z) against class `label`; writes d loss / d z.
template <typename Scalar>
Scalar softmax_xent(const Eigen::Matrix<Scalar, 2, 1>& z, int label, Eigen::Matrix<Scalar, 2, 1>* dz) {
  const Scalar m = z.maxCoeff();
  const Scalar lse = m + std::log((z.array() - m).exp().sum());
  if (dz != nullptr) {
    *dz = (z.array() - lse).exp().matrix();
    (*dz)(label) -= Scalar(1);
  }
  return lse - z(label);
}

}  // namespace earcough::nn

#endif  // EARCOUGH_NN_LAYERS_HPP_
