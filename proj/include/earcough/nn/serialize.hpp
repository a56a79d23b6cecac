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


#ifndef EARCOUGH_NN_SERIALIZE_HPP_
#define EARCOUGH_NN_SERIALIZE_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "earcough/nn/params.hpp"
#include "earcough/nn/spec.hpp"

namespace earcough::nn {

struct StoredModel {
  ModelSpec spec;
  ModelParams<float> params;
};

/// ECN1 container; see docs/model-format.md.
std::vector<std::uint8_t> encode_model(const ModelSpec& spec, const ModelParams<float>& params);

/// Throws Error{TruncatedFile}, Error{BadMagic}, Error{CrcMismatch} or
/// Error{MalformedHeader}.
StoredModel decode_model(std::span<const std::uint8_t> bytes);

void save_model(const std::filesystem::path& path, const ModelSpec& spec, const ModelParams<float>& params);
StoredModel load_model(const std::filesystem::path& path);

}  // namespace earcough::nn

#endif  // EARCOUGH_NN_SERIALIZE_HPP_
