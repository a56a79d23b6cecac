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

#ifndef EARCOUGH_DSP_HPP_
#define EARCOUGH_DSP_HPP_

#include <Eigen/Core>

#include <cmath>
#include <filesystem>
#include <vector>

#include "earcough/audio.hpp"
#include "earcough/wav.hpp"

namespace earcough::dsp {

/// Reads a stereo RIFF/WAVE file. Channel 0 of the file becomes the
/// feed-forward row, channel 1 the feedback row.
/// Throws Error{NotStereo | UnsupportedEncoding | UnsupportedRate | MalformedHeader}.
DualChannelRecording load_recording(const std::filesystem::path& path);

void save_recording(const DualChannelRecording& rec, const std::filesystem::path& path,
                    wav::SampleFormat format = wav::SampleFormat::Pcm16);

/// Kaiser-windowed sinc low-pass. `cutoff` and `transition` are fractions of
/// the sample rate; the returned filter has odd length and unit DC gain.
Eigen::VectorXd design_lowpass(double cutoff, double transition, double stopband_db);

/// Kaiser beta for a requested stopband attenuation in dB.
double kaiser_beta(double stopband_db);

/// Anti-aliased integer-factor decimation. The low-pass cuts at 0.45 x the
/// target rate with >= 60 dB stopband from the target Nyquist upward; the
/// filter's group delay is compensated so output sample m aligns with input
/// sample m*k. Output length is floor(N / k).
/// Throws Error{NonIntegerFactor}.
DualChannelRecording decimate(const DualChannelRecording& rec, int target_rate_hz);

/// Back-to-back 0.5 s windows; a trailing remainder is dropped. `hop_s`
/// smaller than 0.5 gives overlapping windows.
std::vector<DualChannelWindow> slice_windows(const DualChannelRecording& rec,
                                             double hop_s = kWindowSeconds);

/// Per-channel standardization to zero mean and unit (population) standard
/// deviation. A channel with sd < 1e-8 becomes all zeros.
DualChannelWindow normalize(DualChannelWindow win);

template <typename Derived>
double rms(const Eigen::MatrixBase<Derived>& x) {
  if (x.size() == 0) return 0.0;
  return std::sqrt(x.template cast<double>().squaredNorm() / static_cast<double>(x.size()));
}

}  // namespace earcough::dsp

#endif  // EARCOUGH_DSP_HPP_
