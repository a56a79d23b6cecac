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

#ifndef EARCOUGH_WAV_HPP_
#define EARCOUGH_WAV_HPP_

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace earcough::wav {

enum class SampleFormat { Pcm16, Float32 };

/// Interleaved-free view of a RIFF/WAVE file: one row per channel.
struct WavData {
  Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> channels;
  int sample_rate_hz = 0;
  SampleFormat format = SampleFormat::Pcm16;
};

/// Parses PCM 16-bit and IEEE float 32-bit files (plain or
/// WAVE_FORMAT_EXTENSIBLE). 16-bit samples are divided by 32768.
/// Throws Error{MalformedHeader | UnsupportedEncoding}.
WavData decode(std::span<const std::uint8_t> bytes);
WavData read(const std::filesystem::path& path);

/// 16-bit output is round(x * 32768) clamped to [-32768, 32767].
std::vector<std::uint8_t> encode(const WavData& data);
void write(const std::filesystem::path& path, const WavData& data);

}  // namespace earcough::wav

#endif  // EARCOUGH_WAV_HPP_
