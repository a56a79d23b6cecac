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


#ifndef EARCOUGH_NN_PROFILE_HPP_
#define EARCOUGH_NN_PROFILE_HPP_

#include <cstdint>
#include <vector>

#include "earcough/nn/spec.hpp"

namespace earcough::nn {

struct LayerProfile {
  LayerKind kind = LayerKind::Dense;
  Shape output;
  std::uint64_t flops = 0;
  std::uint64_t params = 0;
};

/// Resource accounting for one single-window inference with 32-bit values.
/// flops counts 2 per multiply-accumulate in convolution and dense layers.
/// peak_activation_bytes = input buffer + the largest sum of two
/// consecutive layer outputs (the double-buffered executor's footprint).
struct ResourceProfile {
  std::uint64_t flops = 0;
  std::uint64_t param_count = 0;
  std::uint64_t param_bytes = 0;
  std::uint64_t peak_activation_bytes = 0;
  std::uint64_t space_bytes = 0;
  std::vector<LayerProfile> layers;
};

std::uint64_t layer_flops(const LayerSpec& layer, const Shape& output);

ResourceProfile profile(const ModelSpec& spec);

}  // namespace earcough::nn

#endif  // EARCOUGH_NN_PROFILE_HPP_
