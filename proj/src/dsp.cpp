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

#include "earcough/dsp.hpp"

#include <cmath>
#include <numbers>

#include "earcough/error.hpp"

namespace earcough::dsp {

DualChannelRecording load_recording(const std::filesystem::path& path) {
  wav::WavData data = wav::read(path);
  if (data.channels.rows() != 2) {
    throw Error(Errc::NotStereo, path.string() + " has " + std::to_string(data.channels.rows()) +
                                     " channel(s)");
  }
  if (!is_supported_rate(data.sample_rate_hz)) {
    throw Error(Errc::UnsupportedRate, std::to_string(data.sample_rate_hz) + " Hz");
  }
  if (!data.channels.allFinite()) {
    throw Error(Errc::InvalidArgument, path.string() + " contains non-finite samples");
  }
  DualChannelRecording rec;
  rec.samples = data.channels;
  rec.sample_rate_hz = data.sample_rate_hz;
  rec.source_id = path.filename().string();
  return rec;
}

void save_recording(const DualChannelRecording& rec, const std::filesystem::path& path,
                    wav::SampleFormat format) {
  wav::WavData data;
  data.channels = rec.samples;
  data.sample_rate_hz = rec.sample_rate_hz;
  data.format = format;
  wav::write(path, data);
}

double kaiser_beta(double stopband_db) {
  if (stopband_db > 50.0) return 0.1102 * (stopband_db - 8.7);
  if (stopband_db >= 21.0) {
    return 0.5842 * std::pow(stopband_db - 21.0, 0.4) + 0.07886 * (stopband_db - 21.0);
  }
  return 0.0;
}

Eigen::VectorXd design_lowpass(double cutoff, double transition, double stopband_db) {
  const double beta = kaiser_beta(stopband_db);
  auto taps = static_cast<Eigen::Index>(
      std::ceil((stopband_db - 7.95) / (2.285 * 2.0 * std::numbers::pi * transition)) + 1);
  if (taps % 2 == 0) ++taps;
  const Eigen::Index center = (taps - 1) / 2;
  const double i0_beta = std::cyl_bessel_i(0.0, beta);

  Eigen::VectorXd h(taps);
  for (Eigen::Index n = 0; n < taps; ++n) {
    const double m = static_cast<double>(n - center);
    const double sinc = m == 0.0 ? 2.0 * cutoff
                                 : std::sin(2.0 * std::numbers::pi * cutoff * m) / (std::numbers::pi * m);
    const double ratio = m / static_cast<double>(center);
    const double window = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - ratio * ratio))) / i0_beta;
    h(n) = sinc * window;
  }
  h /= h.sum();
  return h;
}

DualChannelRecording decimate(const DualChannelRecording& rec, int target_rate_hz) {
  if (target_rate_hz <= 0 || rec.sample_rate_hz % target_rate_hz != 0) {
    throw Error(Errc::NonIntegerFactor, std::to_string(rec.sample_rate_hz) + " -> " +
                                            std::to_string(target_rate_hz) + " Hz");
  }
  const int factor = rec.sample_rate_hz / target_rate_hz;
  if (factor == 1) return rec;

  const double src = rec.sample_rate_hz;
  const Eigen::VectorXf h =
      design_lowpass(0.45 * target_rate_hz / src, 0.1 * target_rate_hz / src, 60.0).cast<float>();
  const Eigen::Index taps = h.size();
  const Eigen::Index center = (taps - 1) / 2;
  const Eigen::Index n_in = rec.frames();
  const Eigen::Index n_out = n_in / factor;

  DualChannelRecording out;
  out.sample_rate_hz = target_rate_hz;
  out.source_id = rec.source_id;
  out.samples.resize(2, n_out);

  // Zero-padded copy so every output sample is one contiguous dot product.
  Eigen::VectorXf padded(n_in + 2 * center);
  for (int c = 0; c < 2; ++c) {
    padded.setZero();
    padded.segment(center, n_in) = rec.samples.row(c).transpose();
    for (Eigen::Index m = 0; m < n_out; ++m) {
      // y[m] = sum_j h[j] x[m*k + center - j]; h is symmetric.
      out.samples(c, m) = h.dot(padded.segment(m * factor, taps));
    }
  }
  return out;
}

std::vector<DualChannelWindow> slice_windows(const DualChannelRecording& rec, double hop_s) {
  const Eigen::Index len = window_length(rec.sample_rate_hz);
  const auto hop = static_cast<Eigen::Index>(std::llround(hop_s * rec.sample_rate_hz));
  if (hop <= 0) throw Error(Errc::InvalidArgument, "hop must be positive");
  std::vector<DualChannelWindow> windows;
  if (rec.frames() < len) return windows;
  const Eigen::Index count = (rec.frames() - len) / hop + 1;
  windows.reserve(static_cast<std::size_t>(count));
  for (Eigen::Index i = 0; i < count; ++i) {
    DualChannelWindow w;
    w.data = rec.samples.middleCols(i * hop, len);
    w.sample_rate_hz = rec.sample_rate_hz;
    w.origin = {rec.source_id, static_cast<double>(i * hop) / rec.sample_rate_hz};
    windows.push_back(std::move(w));
  }
  return windows;
}

DualChannelWindow normalize(DualChannelWindow win) {
  const Eigen::Index n = win.length();
  for (int c = 0; c < 2 && n > 0; ++c) {
    auto row = win.data.row(c);
    const Eigen::RowVectorXd x = row.cast<double>();
    const double mean = x.mean();
    const double sd = std::sqrt((x.array() - mean).square().mean());
    if (sd < 1e-8) {
      row.setZero();
    } else {
      row = ((x.array() - mean) / sd).cast<float>().matrix();
    }
  }
  win.normalized = true;
  return win;
}

}  // namespace earcough::dsp
