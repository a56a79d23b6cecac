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

#include "earcough/spectral.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <vector>

namespace earcough::spectral {

Eigen::Index next_fast_size(Eigen::Index n) {
  if (n <= 1) return 1;
  for (Eigen::Index m = n;; ++m) {
    Eigen::Index r = m;
    for (int p : {2, 3, 5}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return m;
  }
}

Eigen::VectorXf shape(const Eigen::VectorXf& x, int rate_hz,
                      const std::function<double(double)>& response) {
  if (x.size() == 0) return x;
  const Eigen::Index n = next_fast_size(x.size() + 1024);
  std::vector<float> buf(static_cast<std::size_t>(n), 0.0f);
  std::copy(x.data(), x.data() + x.size(), buf.begin());

  Eigen::FFT<float> fft;
  fft.SetFlag(Eigen::FFT<float>::HalfSpectrum);
  std::vector<std::complex<float>> spec;
  fft.fwd(spec, buf);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double f = static_cast<double>(k) * rate_hz / static_cast<double>(n);
    spec[k] *= static_cast<float>(response(f));
  }
  std::vector<float> out;
  fft.inv(out, spec, n);
  return Eigen::Map<const Eigen::VectorXf>(out.data(), x.size());
}

Eigen::VectorXf bandpass(const Eigen::VectorXf& x, int rate_hz, double lo_hz, double hi_hz) {
  return shape(x, rate_hz, [=](double f) { return (f >= lo_hz && f <= hi_hz) ? 1.0 : 0.0; });
}

double band_energy_fraction(const Eigen::VectorXf& x, int rate_hz, double lo_hz, double hi_hz) {
  const Eigen::Index n = x.size();
  if (n == 0) return 0.0;
  Eigen::FFT<double> fft;
  std::vector<double> buf(x.data(), x.data() + n);
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, buf);
  double inside = 0.0, total = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index folded = std::min(k, n - k);
    const double f = static_cast<double>(folded) * rate_hz / static_cast<double>(n);
    const double e = std::norm(spec[static_cast<std::size_t>(k)]);
    total += e;
    if (f >= lo_hz && f <= hi_hz) inside += e;
  }
  return total > 0.0 ? inside / total : 0.0;
}

double lowpass_gain(double f, double cutoff_hz, int order) {
  return 1.0 / std::sqrt(1.0 + std::pow(f / cutoff_hz, 2 * order));
}

double lowshelf_gain(double f, double corner_hz, double boost_db) {
  // First-order shelf magnitude: boost below the corner, unity above.
  const double g = std::pow(10.0, boost_db / 20.0);
  const double r = (f / corner_hz) * (f / corner_hz);
  return std::sqrt((g * g + r) / (1.0 + r));
}

}  // namespace earcough::spectral
