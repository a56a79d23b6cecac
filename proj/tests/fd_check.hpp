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


#ifndef EARCOUGH_TESTS_FD_CHECK_HPP_
#define EARCOUGH_TESTS_FD_CHECK_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "earcough/nn.hpp"
#include "earcough/random.hpp"

namespace earcough::test {

/// Outcome of comparing analytic gradients with central differences.
/// Coordinates whose +/- eps perturbation moves a ReLU gate or a max-pool
/// argmax are not differentiable there and are counted in `skipped`.
struct FdResult {
  double max_rel = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
};

inline double rel_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-7});
}

namespace fd_detail {

// Activation pattern of every rectified layer plus every pooling argmax.
struct Pattern {
  std::vector<std::vector<bool>> gates;
  std::vector<std::vector<Eigen::Index>> argmax;
  bool operator==(const Pattern&) const = default;
};

inline double loss_and_pattern(const nn::ModelSpec& spec, const nn::ModelParams<double>& p,
                               const nn::Mat<double>& x, int label, Pattern* pattern) {
  nn::ForwardCache<double> cache;
  const nn::Probs<double> z = nn::forward_cached<double>(spec, p, x, cache);
  if (pattern != nullptr) {
    pattern->gates.clear();
    for (std::size_t k = 0; k < spec.layers.size(); ++k) {
      if (!spec.layers[k].relu) continue;
      const auto& a = cache.acts[k + 1];
      std::vector<bool> g(static_cast<std::size_t>(a.size()));
      for (Eigen::Index i = 0; i < a.size(); ++i) g[static_cast<std::size_t>(i)] = a.data()[i] > 0.0;
      pattern->gates.push_back(std::move(g));
    }
    pattern->argmax = cache.argmax;
  }
  return nn::softmax_xent<double>(z, label, nullptr);
}

}  // namespace fd_detail

inline nn::Mat<double> random_input(const nn::ModelSpec& spec, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  nn::Mat<double> x(2, spec.input_length);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
  return x;
}

/// Random parameters (weights and biases) for `spec` drawn from `seed`.
inline nn::ModelParams<double> random_params(const nn::ModelSpec& spec, Rng& rng) {
  nn::ModelParams<double> p = nn::init_params<double>(spec, rng);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (auto& l : p.layers) {
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = u(rng);
  }
  return p;
}

/// Checks every parameter gradient of the whole network on one random
/// input and label derived from `seed`.
inline FdResult check_model_gradient(const nn::ModelSpec& spec, std::uint64_t seed, double eps = 1e-3) {
  Rng rng = make_rng(seed, {0x6664});
  const nn::ModelParams<double> params = random_params(spec, rng);
  const nn::Mat<double> x = random_input(spec, rng);
  const int label = static_cast<int>(seed % 2);
  const auto analytic = nn::backward<double>(spec, params, x, static_cast<nn::Target>(label));
  const nn::Vec<double> g = analytic.grads.flatten();
  const nn::Vec<double> theta = params.flatten();

  fd_detail::Pattern base;
  fd_detail::loss_and_pattern(spec, params, x, label, &base);
  FdResult r;
  nn::ModelParams<double> work = params;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    nn::Vec<double> t = theta;
    fd_detail::Pattern plus, minus;
    t(i) = theta(i) + eps;
    work.unflatten(t);
    const double lp = fd_detail::loss_and_pattern(spec, work, x, label, &plus);
    t(i) = theta(i) - eps;
    work.unflatten(t);
    const double lm = fd_detail::loss_and_pattern(spec, work, x, label, &minus);
    if (!(plus == base) || !(minus == base)) {
      ++r.skipped;
      continue;
    }
    r.max_rel = std::max(r.max_rel, rel_error(g(i), (lp - lm) / (2.0 * eps)));
    ++r.checked;
  }
  return r;
}

namespace layer_fd {

using namespace earcough::nn;

// Layer-level objective J = sum(r .* y) with r fixed, so dJ/dy = r.
struct LayerCase {
  LayerSpec spec;
  Mat<double> x;
  LayerParams<double> p;
  Mat<double> r;
};

inline Mat<double> random_mat(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat<double> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

inline Eigen::Index out_length(const LayerSpec& l, Eigen::Index in_len) {
  switch (l.kind) {
    case LayerKind::Conv2d:
    case LayerKind::Conv1d: return (in_len + l.stride - 1) / l.stride;
    case LayerKind::MaxPool: return in_len / l.pool;
    default: return 1;
  }
}

inline Mat<double> layer_out(const LayerCase& c, const Mat<double>& x, const LayerParams<double>& p,
                      std::vector<Eigen::Index>* argmax) {
  const Eigen::Index out_rows = c.spec.kind == LayerKind::MaxPool || c.spec.kind == LayerKind::GlobalAvgPool
                                    ? x.rows()
                                    : c.spec.out_channels;
  Mat<double> y(out_rows, out_length(c.spec, x.cols()));
  std::vector<double> scratch(static_cast<std::size_t>(x.rows() * (x.cols() + c.spec.kernel) * 2 + 16));
  switch (c.spec.kind) {
    case LayerKind::Conv2d:
    case LayerKind::Conv1d: conv_forward<double>(c.spec, p, x, y, scratch.data()); break;
    case LayerKind::MaxPool: maxpool_forward<double>(c.spec, x, y, argmax); break;
    case LayerKind::GlobalAvgPool: gap_forward<double>(x, y); break;
    case LayerKind::Dense: dense_forward<double>(c.spec, p, x, y); break;
  }
  return y;
}

// Runs the layer's backward pass and compares every input and parameter
// coordinate against central differences.
inline FdResult check_layer(const LayerCase& c, double eps = 1e-3) {
  std::vector<Eigen::Index> base_arg;
  const Mat<double> y = layer_out(c, c.x, c.p, &base_arg);
  LayerParams<double> grad{Mat<double>::Zero(c.p.weight.rows(), c.p.weight.cols()), Vec<double>::Zero(c.p.bias.size())};
  Mat<double> dx;
  std::vector<double> scratch;
  switch (c.spec.kind) {
    case LayerKind::Conv2d:
    case LayerKind::Conv1d: conv_backward<double>(c.spec, c.p, c.x, y, c.r, &dx, grad, scratch); break;
    case LayerKind::MaxPool: maxpool_backward<double>(c.x.cols(), base_arg, c.r, dx); break;
    case LayerKind::GlobalAvgPool: gap_backward<double>(c.x.cols(), c.r, dx); break;
    case LayerKind::Dense: dense_backward<double>(c.spec, c.p, c.x, y, c.r, &dx, grad); break;
  }
  auto gates = [&](const Mat<double>& out) { return (out.array() > 0.0).eval(); };
  const auto base_gates = gates(y);

  FdResult res;
  auto visit = [&](Mat<double>& x, LayerParams<double>& p, double* slot, double analytic) {
    const double keep = *slot;
    std::vector<Eigen::Index> arg_p, arg_m;
    *slot = keep + eps;
    const Mat<double> yp = layer_out(c, x, p, &arg_p);
    *slot = keep - eps;
    const Mat<double> ym = layer_out(c, x, p, &arg_m);
    *slot = keep;
    const bool kink = (c.spec.relu && ((gates(yp) != base_gates).any() || (gates(ym) != base_gates).any())) ||
                      (c.spec.kind == LayerKind::MaxPool && (arg_p != base_arg || arg_m != base_arg));
    if (kink) {
      ++res.skipped;
      return;
    }
    const double numeric = ((yp - ym).cwiseProduct(c.r)).sum() / (2.0 * eps);
    res.max_rel = std::max(res.max_rel, rel_error(analytic, numeric));
    ++res.checked;
  };
  Mat<double> x = c.x;
  LayerParams<double> p = c.p;
  for (Eigen::Index i = 0; i < x.size(); ++i) visit(x, p, x.data() + i, dx.data()[i]);
  for (Eigen::Index i = 0; i < p.weight.size(); ++i) visit(x, p, p.weight.data() + i, grad.weight.data()[i]);
  for (Eigen::Index i = 0; i < p.bias.size(); ++i) visit(x, p, p.bias.data() + i, grad.bias.data()[i]);
  return res;
}

inline LayerCase make_case(LayerKind kind, std::uint64_t seed) {
  Rng rng = make_rng(seed, {static_cast<std::uint64_t>(kind)});
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  LayerCase c;
  c.spec.kind = kind;
  const int in = kind == LayerKind::Conv2d ? 2 : pick(1, 4);
  const int len = pick(5, 14);
  c.x = random_mat(in, kind == LayerKind::Dense ? pick(1, 3) : len, rng);
  c.spec.in_channels = in;
  c.spec.relu = pick(0, 1) == 1;
  switch (kind) {
    case LayerKind::Conv2d:
    case LayerKind::Conv1d:
      c.spec.out_channels = pick(1, 4);
      c.spec.kernel = 2 * pick(0, 3) + 1;
      c.spec.stride = pick(1, 3);
      c.p = {random_mat(c.spec.out_channels, c.spec.kernel * in, rng), random_mat(c.spec.out_channels, 1, rng)};
      break;
    case LayerKind::Dense:
      c.spec.in_channels = static_cast<int>(c.x.size());
      c.spec.out_channels = pick(1, 5);
      c.p = {random_mat(c.spec.out_channels, c.x.size(), rng), random_mat(c.spec.out_channels, 1, rng)};
      break;
    case LayerKind::MaxPool:
      c.spec.pool = pick(1, 4);
      c.spec.relu = false;
      break;
    case LayerKind::GlobalAvgPool:
      c.spec.relu = false;
      break;
  }
  c.spec.out_channels = kind == LayerKind::MaxPool || kind == LayerKind::GlobalAvgPool ? in : c.spec.out_channels;
  c.r = random_mat(c.spec.out_channels, out_length(c.spec, c.x.cols()), rng);
  return c;
}

}  // namespace layer_fd

using layer_fd::check_layer;
using layer_fd::LayerCase;
using layer_fd::make_case;

}  // namespace earcough::test

#endif  // EARCOUGH_TESTS_FD_CHECK_HPP_
