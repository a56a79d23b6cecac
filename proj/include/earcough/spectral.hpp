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

#ifndef EARCOUGH_SPECTRAL_HPP_
#define EARCOUGH_SPECTRAL_HPP_

#include <Eigen/Core>

#include <functional>

namespace earcough::spectral {

/// Smallest n' >= n whose only prime factors are 2, 3 and 5.
Eigen::Index next_fast_size(Eigen::Index n);

/// Zero-phase filtering in the frequency domain: every bin at frequency f
/// (Hz) is multiplied by the real gain `response(f)`. The signal is
/// zero-padded before the transform so circular wrap-around stays small.
Eigen::VectorXf shape(const Eigen::VectorXf& x, int rate_hz,
                      const std::function<double(double)>& response);

/// Brick-wall band-pass built on `shape`.
Eigen::VectorXf bandpass(const Eigen::VectorXf& x, int rate_hz, double lo_hz, double hi_hz);

/// Fraction of signal energy in [lo_hz, hi_hz] measured on the DFT of `x`.
double band_energy_fraction(const Eigen::VectorXf& x, int rate_hz, double lo_hz, double hi_hz);

/// Magnitude-response helpers used by the channel models.
double lowpass_gain(double f, double cutoff_hz, int order);
double lowshelf_gain(double f, double corner_hz, double boost_db);

}  // namespace earcough::spectral

#endif  // EARCOUGH_SPECTRAL_HPP_
