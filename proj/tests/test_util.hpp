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


#ifndef EARCOUGH_TESTS_TEST_UTIL_HPP_
#define EARCOUGH_TESTS_TEST_UTIL_HPP_

#include <unistd.h>

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "earcough/audio.hpp"
#include "earcough/error.hpp"

namespace earcough::test {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("earcough_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline Eigen::VectorXf sine(Eigen::Index n, int rate, double hz, double amp = 1.0, double phase = 0.0) {
  Eigen::VectorXf x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i) = static_cast<float>(amp * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / rate + phase));
  }
  return x;
}

inline DualChannelRecording make_recording(const Eigen::VectorXf& ff, const Eigen::VectorXf& fb, int rate) {
  DualChannelRecording r;
  r.samples.resize(2, ff.size());
  r.samples.row(0) = ff.transpose();
  r.samples.row(1) = fb.transpose();
  r.sample_rate_hz = rate;
  r.source_id = "test";
  return r;
}

inline DualChannelWindow make_window(const Eigen::VectorXf& ff, const Eigen::VectorXf& fb, int rate) {
  DualChannelWindow w;
  w.data.resize(2, ff.size());
  w.data.row(0) = ff.transpose();
  w.data.row(1) = fb.transpose();
  w.sample_rate_hz = rate;
  return w;
}

/// Amplitude of the `hz` component, by direct projection (exact for an
/// integer number of cycles).
inline double tone_amplitude(const Eigen::VectorXf& x, int rate, double hz) {
  std::complex<double> acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double w = 2.0 * std::numbers::pi * hz * static_cast<double>(i) / rate;
    acc += static_cast<double>(x(i)) * std::complex<double>(std::cos(w), -std::sin(w));
  }
  return 2.0 * std::abs(acc) / static_cast<double>(x.size());
}

/// Frequency (Hz) of the largest DFT magnitude bin, DC excluded.
inline double peak_frequency(const Eigen::VectorXf& x, int rate) {
  Eigen::FFT<float> fft;
  std::vector<float> in(x.data(), x.data() + x.size());
  std::vector<std::complex<float>> out;
  fft.fwd(out, in);
  std::size_t best = 1;
  for (std::size_t k = 1; k <= in.size() / 2; ++k) {
    if (std::abs(out[k]) > std::abs(out[best])) best = k;
  }
  return static_cast<double>(best) * rate / static_cast<double>(in.size());
}

/// Share of one-sided DFT power inside [lo_hz, hi_hz], DC excluded.
inline double band_fraction(const Eigen::VectorXf& x, int rate, double lo_hz, double hi_hz) {
  Eigen::FFT<double> fft;
  std::vector<double> in(x.data(), x.data() + x.size());
  std::vector<std::complex<double>> out;
  fft.fwd(out, in);
  double inside = 0.0, total = 0.0;
  for (std::size_t k = 1; k <= in.size() / 2; ++k) {
    const double f = static_cast<double>(k) * rate / static_cast<double>(in.size());
    const double p = std::norm(out[k]);
    total += p;
    if (f >= lo_hz && f <= hi_hz) inside += p;
  }
  return total > 0.0 ? inside / total : 0.0;
}

inline double rms(const Eigen::VectorXf& x) {
  return std::sqrt(x.cast<double>().squaredNorm() / static_cast<double>(x.size()));
}

/// Minimal RIFF/WAVE writer for arbitrary headers (used to build invalid
/// or unsupported files).
inline std::vector<std::uint8_t> raw_wav(std::uint16_t format_tag, std::uint16_t channels, std::uint32_t rate,
                                         std::uint16_t bits, const std::vector<std::uint8_t>& payload) {
  std::vector<std::uint8_t> b;
  auto put = [&b](const void* p, std::size_t n) {
    const auto* c = static_cast<const std::uint8_t*>(p);
    b.insert(b.end(), c, c + n);
  };
  auto u32 = [&put](std::uint32_t v) { put(&v, 4); };
  auto u16 = [&put](std::uint16_t v) { put(&v, 2); };
  put("RIFF", 4);
  u32(static_cast<std::uint32_t>(36 + payload.size()));
  put("WAVE", 4);
  put("fmt ", 4);
  u32(16);
  u16(format_tag);
  u16(channels);
  u32(rate);
  u32(rate * channels * bits / 8);
  u16(static_cast<std::uint16_t>(channels * bits / 8));
  u16(bits);
  put("data", 4);
  u32(static_cast<std::uint32_t>(payload.size()));
  put(payload.data(), payload.size());
  return b;
}

/// Runs `fn` and returns the code of the earcough::Error it throws.
template <typename Fn>
Errc thrown_code(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an earcough::Error";
  return Errc::InvalidArgument;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

/// Relative path -> contents for every regular file under `root`.
inline std::map<std::string, std::string> read_tree(const std::filesystem::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[std::filesystem::relative(e.path(), root).string()] = read_file(e.path());
  }
  return files;
}

}  // namespace earcough::test

#endif  // EARCOUGH_TESTS_TEST_UTIL_HPP_
