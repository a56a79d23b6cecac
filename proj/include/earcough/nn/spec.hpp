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


#ifndef EARCOUGH_NN_SPEC_HPP_
#define EARCOUGH_NN_SPEC_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace earcough::nn {

enum class LayerKind : std::uint8_t {
  Conv2d = 1,
  Conv1d = 2,
  MaxPool = 3,
  GlobalAvgPool = 4,
  Dense = 5,
};

std::string_view to_string(LayerKind kind);

/// One node of the layer graph. For Conv2d, `in_channels` is the kernel
/// height (the two microphone rows) and the kernel spans `kernel` samples.
struct LayerSpec {
  LayerKind kind = LayerKind::Dense;
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 1;
  int stride = 1;
  int pool = 1;
  bool relu = false;

  bool has_params() const { return kind == LayerKind::Conv2d || kind == LayerKind::Conv1d || kind == LayerKind::Dense; }
  std::size_t weight_count() const;
  std::size_t bias_count() const;
  bool operator==(const LayerSpec&) const = default;
};

/// Activation shape: channels x time. Dense outputs have length 1.
struct Shape {
  int channels = 0;
  int length = 0;

  std::size_t size() const { return static_cast<std::size_t>(channels) * static_cast<std::size_t>(length); }
  bool operator==(const Shape&) const = default;
};

/// Widths and kernels of the four-block, three-dense layout.
struct ArchConfig {
  int first_kernel = 9;
  int first_stride = 2;
  int kernel = 9;
  std::array<int, 4> widths{12, 16, 24, 32};
  std::array<int, 3> pools{4, 4, 4};
  std::array<int, 2> hidden{32, 16};
};

struct ModelSpec {
  int sample_rate_hz = 8000;
  int input_length = 4000;
  std::vector<LayerSpec> layers;

  Shape input_shape() const { return {2, input_length}; }
  /// Output shape of every layer, in order. Throws Error{InvalidArgument}
  /// if a length collapses to zero or channel counts do not chain.
  std::vector<Shape> output_shapes() const;
  std::size_t param_count() const;
  /// Structural check: four convolution blocks (the first opened by the
  /// only 2-D convolution, of height 2) and three dense layers ending in 2.
  void validate() const;
  bool operator==(const ModelSpec&) const = default;
};

ModelSpec make_spec(int sample_rate_hz, int input_length, const ArchConfig& arch);

/// Reference architecture for a supported rate. Throws Error{UnsupportedRate}.
ModelSpec default_spec(int sample_rate_hz);

/// Small variant (L = 64) for gradient checks and toy problems.
ModelSpec reduced_spec();

}  // namespace earcough::nn

#endif  // EARCOUGH_NN_SPEC_HPP_
