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

#include "earcough/augment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "earcough/config.hpp"
#include "earcough/dsp.hpp"
#include "earcough/error.hpp"

namespace earcough::augment {
namespace {

constexpr double kSincZeroCrossings = 16.0;
constexpr std::size_t kWindowTableSize = 4096;

void check_interval(const char* name, const Interval& r) {
  if (!(r.lo <= r.hi)) throw Error(Errc::InvalidArgument, std::string(name) + " has lo > hi");
}

double draw(Rng& rng, const Interval& r) { return r.lo == r.hi ? r.lo : uniform(rng, r.lo, r.hi); }

// y[i] = x(i * step) with a Kaiser-windowed sinc kernel; the kernel is
// widened when step > 1 so the resampled signal is band-limited.
Eigen::RowVectorXf sinc_resample(const Eigen::RowVectorXf& x, double step) {
  const Eigen::Index n = x.size();
  const double cutoff = 0.5 * std::min(1.0, 1.0 / step);  // cycles per input sample
  const double half_width = kSincZeroCrossings / (2.0 * cutoff);
  static const std::vector<double> window_table = [] {
    const double beta = dsp::kaiser_beta(80.0);
    const double i0_beta = std::cyl_bessel_i(0.0, beta);
    std::vector<double> t(kWindowTableSize + 1);
    for (std::size_t i = 0; i <= kWindowTableSize; ++i) {
      const double r = static_cast<double>(i) / kWindowTableSize;
      t[i] = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    }
    return t;
  }();

  Eigen::RowVectorXf y = Eigen::RowVectorXf::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * step;
    if (t > static_cast<double>(n - 1)) break;
    const auto lo = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::ceil(t - half_width)));
    const auto hi = std::min<Eigen::Index>(n - 1, static_cast<Eigen::Index>(std::floor(t + half_width)));
    double acc = 0.0;
    for (Eigen::Index k = lo; k <= hi; ++k) {
      const double d = t - static_cast<double>(k);
      const double arg = 2.0 * cutoff * d;
      const double sinc = arg == 0.0 ? 1.0 : std::sin(std::numbers::pi * arg) / (std::numbers::pi * arg);
      const double pos = std::min(1.0, std::abs(d) / half_width) * kWindowTableSize;
      const auto at = std::min<std::size_t>(static_cast<std::size_t>(pos), kWindowTableSize - 1);
      const double frac = pos - static_cast<double>(at);
      const double w = window_table[at] * (1.0 - frac) + window_table[at + 1] * frac;
      acc += x(k) * 2.0 * cutoff * sinc * w;
    }
    y(i) = static_cast<float>(acc);
  }
  return y;
}

}  // namespace

void AugmentPlan::validate() const {
  check_interval("gain_db", gain_db);
  check_interval("shift_s", shift_s);
  check_interval("pitch_semitones", pitch_semitones);
  check_interval("speed_factor", speed_factor);
  check_interval("mask_fraction", mask_fraction);
  check_interval("white_noise_snr_db", white_noise_snr_db);
  check_interval("background_snr_db", background_snr_db);
  if (mask_fraction.lo < 0.0 || mask_fraction.hi > 0.10) {
    throw Error(Errc::FractionOutOfRange, "mask_fraction must lie within [0, 0.10]");
  }
  if (std::max(std::abs(shift_s.lo), std::abs(shift_s.hi)) > kWindowSeconds) {
    throw Error(Errc::ShiftTooLarge, "shift_s must lie within one window");
  }
  if (speed_factor.lo < 0.5 || speed_factor.hi > 2.0) {
    throw Error(Errc::InvalidArgument, "speed_factor must lie within [0.5, 2]");
  }
  if (std::max(std::abs(pitch_semitones.lo), std::abs(pitch_semitones.hi)) > 12.0) {
    throw Error(Errc::InvalidArgument, "pitch_semitones must lie within [-12, 12]");
  }
  if (copies_per_clip < 0) throw Error(Errc::InvalidArgument, "copies_per_clip must be >= 0");
}

AugmentPlan parse_plan(std::istream& in) {
  AugmentPlan plan;
  for (const auto& [key, value] : config::parse(in)) {
    auto range = [&] {
      auto [lo, hi] = config::to_range(key, value);
      return Interval{lo, hi};
    };
    if (key == "gain_db") plan.gain_db = range();
    else if (key == "shift_s") plan.shift_s = range();
    else if (key == "pitch_semitones") plan.pitch_semitones = range();
    else if (key == "speed_factor") plan.speed_factor = range();
    else if (key == "mask_fraction") plan.mask_fraction = range();
    else if (key == "white_noise_snr_db") plan.white_noise_snr_db = range();
    else if (key == "background_snr_db") plan.background_snr_db = range();
    else if (key == "copies_per_clip") plan.copies_per_clip = static_cast<int>(config::to_int(key, value));
    else if (key == "seed") plan.seed = config::to_uint64(key, value);
    else if (key == "stage.gain") plan.stages.gain = config::to_bool(key, value);
    else if (key == "stage.shift") plan.stages.shift = config::to_bool(key, value);
    else if (key == "stage.pitch") plan.stages.pitch = config::to_bool(key, value);
    else if (key == "stage.speed") plan.stages.speed = config::to_bool(key, value);
    else if (key == "stage.mask") plan.stages.mask = config::to_bool(key, value);
    else if (key == "stage.white_noise") plan.stages.white_noise = config::to_bool(key, value);
    else if (key == "stage.background") plan.stages.background = config::to_bool(key, value);
    else if (key == "stage.normalize") plan.stages.normalize = config::to_bool(key, value);
    else throw Error(Errc::InvalidArgument, "unknown augment key '" + key + "'");
  }
  plan.validate();
  return plan;
}

AugmentPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  return parse_plan(in);
}

std::string format_plan(const AugmentPlan& plan) {
  std::ostringstream out;
  out.precision(17);
  auto range = [&](const char* key, const Interval& r) { out << key << " = " << r.lo << ", " << r.hi << "\n"; };
  auto flag = [&](const char* key, bool v) { out << "stage." << key << " = " << (v ? "true" : "false") << "\n"; };
  range("gain_db", plan.gain_db);
  range("shift_s", plan.shift_s);
  range("pitch_semitones", plan.pitch_semitones);
  range("speed_factor", plan.speed_factor);
  range("mask_fraction", plan.mask_fraction);
  range("white_noise_snr_db", plan.white_noise_snr_db);
  range("background_snr_db", plan.background_snr_db);
  out << "copies_per_clip = " << plan.copies_per_clip << "\n";
  out << "seed = " << plan.seed << "\n";
  flag("gain", plan.stages.gain);
  flag("shift", plan.stages.shift);
  flag("pitch", plan.stages.pitch);
  flag("speed", plan.stages.speed);
  flag("mask", plan.stages.mask);
  flag("white_noise", plan.stages.white_noise);
  flag("background", plan.stages.background);
  flag("normalize", plan.stages.normalize);
  return out.str();
}

DualChannelWindow gain(DualChannelWindow win, double db) {
  win.data *= static_cast<float>(std::pow(10.0, db / 20.0));
  return win;
}

DualChannelWindow time_shift(DualChannelWindow win, double shift_s) {
  if (std::abs(shift_s) > kWindowSeconds) {
    throw Error(Errc::ShiftTooLarge, std::to_string(shift_s) + " s");
  }
  const Eigen::Index len = win.length();
  if (len == 0) return win;
  const auto samples = static_cast<Eigen::Index>(std::llround(shift_s * win.sample_rate_hz));
  const Eigen::Index n = ((samples % len) + len) % len;
  if (n == 0) return win;
  DualSignal rotated(2, len);
  rotated.rightCols(len - n) = win.data.leftCols(len - n);
  rotated.leftCols(n) = win.data.rightCols(n);
  win.data = std::move(rotated);
  return win;
}

DualChannelWindow pitch_shift(DualChannelWindow win, double semitones) {
  if (std::abs(semitones) > 12.0) throw Error(Errc::InvalidArgument, "pitch shift beyond one octave");
  if (semitones == 0.0) return win;
  const double step = std::pow(2.0, semitones / 12.0);
  for (int c = 0; c < 2; ++c) win.data.row(c) = sinc_resample(win.data.row(c), step);
  return win;
}

DualChannelWindow speed(DualChannelWindow win, double factor) {
  if (factor < 0.5 || factor > 2.0) throw Error(Errc::InvalidArgument, "speed factor outside [0.5, 2]");
  if (factor == 1.0) return win;
  const Eigen::Index len = win.length();
  DualSignal out = DualSignal::Zero(2, len);
  for (Eigen::Index i = 0; i < len; ++i) {
    const double t = static_cast<double>(i) * factor;
    const auto k = static_cast<Eigen::Index>(t);
    if (k >= len - 1) {
      if (k == len - 1 && t == static_cast<double>(k)) out.col(i) = win.data.col(k);
      break;
    }
    const auto frac = static_cast<float>(t - static_cast<double>(k));
    out.col(i) = (1.0f - frac) * win.data.col(k) + frac * win.data.col(k + 1);
  }
  win.data = std::move(out);
  return win;
}

DualChannelWindow random_mask(DualChannelWindow win, double fraction, Rng& rng) {
  if (!(fraction >= 0.0 && fraction <= 0.10)) {
    throw Error(Errc::FractionOutOfRange, std::to_string(fraction));
  }
  const Eigen::Index len = win.length();
  const auto count = static_cast<Eigen::Index>(std::llround(fraction * static_cast<double>(len)));
  if (count == 0) return win;
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(len));
  for (int c = 0; c < 2; ++c) {
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    // Partial Fisher-Yates: the first `count` slots are a uniform sample
    // without replacement.
    for (Eigen::Index i = 0; i < count; ++i) {
      std::uniform_int_distribution<Eigen::Index> pick(i, len - 1);
      std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
      win.data(c, idx[static_cast<std::size_t>(i)]) = 0.0f;
    }
  }
  return win;
}

DualChannelWindow add_white_noise(DualChannelWindow win, double snr_db, Rng& rng) {
  if (std::isinf(snr_db) && snr_db > 0) return win;
  const Eigen::Index len = win.length();
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int c = 0; c < 2; ++c) {
    const double signal_rms = dsp::rms(win.data.row(c));
    if (signal_rms == 0.0) throw Error(Errc::SilentInput, "channel " + std::to_string(c) + " is silent");
    Eigen::RowVectorXd noise(len);
    for (Eigen::Index i = 0; i < len; ++i) noise(i) = gauss(rng);
    const double noise_rms = dsp::rms(noise);
    const double scale = signal_rms / (noise_rms * std::pow(10.0, snr_db / 20.0));
    win.data.row(c) += (noise * scale).cast<float>();
  }
  return win;
}

DualChannelWindow mix_background(DualChannelWindow win, const DualChannelWindow& noise, double snr_db) {
  if (noise.sample_rate_hz != win.sample_rate_hz || noise.length() != win.length()) {
    throw Error(Errc::ShapeMismatch, "noise clip does not match window shape");
  }
  const double noise_rms = dsp::rms(noise.data.row(kFeedForward));
  if (noise_rms == 0.0) return win;
  const double signal_rms = dsp::rms(win.data.row(kFeedForward));
  const double scale = signal_rms / (noise_rms * std::pow(10.0, snr_db / 20.0));
  win.data += static_cast<float>(scale) * noise.data;
  return win;
}

DualChannelWindow augment_copy(const DualChannelWindow& win, const AugmentPlan& plan,
                               std::span<const DualChannelWindow> noise_pool,
                               std::uint64_t window_index, int copy_index) {
  Rng rng = make_rng(plan.seed, {window_index, static_cast<std::uint64_t>(copy_index)});
  const auto& st = plan.stages;
  // Draw every parameter up front so enabling or disabling one stage does not
  // reshuffle the others.
  const double g = draw(rng, plan.gain_db);
  const double shift = draw(rng, plan.shift_s);
  const double semis = draw(rng, plan.pitch_semitones);
  const double factor = draw(rng, plan.speed_factor);
  const double mask = draw(rng, plan.mask_fraction);
  const double white_snr = draw(rng, plan.white_noise_snr_db);
  const double bg_snr = draw(rng, plan.background_snr_db);
  const std::size_t bg_pick =
      noise_pool.empty() ? 0 : std::uniform_int_distribution<std::size_t>(0, noise_pool.size() - 1)(rng);

  DualChannelWindow out = win;
  if (st.gain) out = gain(std::move(out), g);
  if (st.shift) out = time_shift(std::move(out), shift);
  if (st.pitch) out = pitch_shift(std::move(out), semis);
  if (st.speed) out = speed(std::move(out), factor);
  if (st.mask) out = random_mask(std::move(out), mask, rng);

  if (st.white_noise && dsp::rms(out.data.row(0)) > 0.0 && dsp::rms(out.data.row(1)) > 0.0) {
    out = add_white_noise(std::move(out), white_snr, rng);
  }
  if (st.background) {
    if (noise_pool.empty()) throw Error(Errc::EmptyNoisePool, "background mixing needs noise clips");
    out = mix_background(std::move(out), noise_pool[bg_pick], bg_snr);
  }

  if (st.normalize) out = dsp::normalize(std::move(out));
  return out;
}

std::vector<DualChannelWindow> apply_plan(std::span<const DualChannelWindow> windows,
                                          const AugmentPlan& plan,
                                          std::span<const DualChannelWindow> noise_pool) {
  plan.validate();
  if (plan.copies_per_clip > 0 && plan.stages.background && noise_pool.empty()) {
    throw Error(Errc::EmptyNoisePool, "background mixing needs noise clips");
  }
  std::vector<DualChannelWindow> out;
  out.reserve(windows.size() * static_cast<std::size_t>(1 + plan.copies_per_clip));
  for (std::size_t i = 0; i < windows.size(); ++i) {
    out.push_back(windows[i]);
    for (int c = 1; c <= plan.copies_per_clip; ++c) {
      out.push_back(augment_copy(windows[i], plan, noise_pool, i, c));
    }
  }
  return out;
}

std::vector<DualChannelWindow> load_noise_pool(const std::filesystem::path& dir, int rate_hz) {
  std::vector<std::filesystem::path> files;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".wav") files.push_back(entry.path());
  }
  if (ec) throw Error(Errc::IoFailure, "cannot list " + dir.string());
  std::sort(files.begin(), files.end());
  std::vector<DualChannelWindow> pool;
  for (const auto& f : files) {
    auto rec = dsp::decimate(dsp::load_recording(f), rate_hz);
    for (auto& w : dsp::slice_windows(rec)) pool.push_back(std::move(w));
  }
  return pool;
}

}  // namespace earcough::augment
