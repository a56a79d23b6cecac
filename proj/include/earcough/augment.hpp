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

#ifndef EARCOUGH_AUGMENT_HPP_
#define EARCOUGH_AUGMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "earcough/audio.hpp"
#include "earcough/random.hpp"

namespace earcough::augment {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool operator==(const Interval&) const = default;
};

/// Parameter ranges for the three augmentation stages (standard, noise,
/// formatting). Every copy draws one value per enabled stage.
struct AugmentPlan {
  Interval gain_db{-6.0, 6.0};
  Interval shift_s{-0.1, 0.1};
  Interval pitch_semitones{-2.0, 2.0};
  Interval speed_factor{0.9, 1.1};
  Interval mask_fraction{0.0, 0.10};
  Interval white_noise_snr_db{5.0, 30.0};
  Interval background_snr_db{0.0, 20.0};
  int copies_per_clip = 1;
  std::uint64_t seed = 0;

  struct Stages {
    bool gain = true;
    bool shift = true;
    bool pitch = true;
    bool speed = true;
    bool mask = true;
    bool white_noise = true;
    bool background = true;
    bool normalize = true;

    bool operator==(const Stages&) const = default;
  } stages;

  bool operator==(const AugmentPlan&) const = default;

  /// Throws Error{InvalidArgument | FractionOutOfRange}.
  void validate() const;
};

AugmentPlan parse_plan(std::istream& in);
AugmentPlan load_plan(const std::filesystem::path& path);
std::string format_plan(const AugmentPlan& plan);

// Standard stage.
DualChannelWindow gain(DualChannelWindow win, double db);
/// Circular rotation of both channels by round(shift_s * rate) samples.
/// Throws Error{ShiftTooLarge} when |shift_s| exceeds one window (0.5 s).
DualChannelWindow time_shift(DualChannelWindow win, double shift_s);
/// Band-limited resampling by 2^(semitones/12), cropped or zero-padded back
/// to the window length. |semitones| <= 12.
DualChannelWindow pitch_shift(DualChannelWindow win, double semitones);
/// Linear-interpolation time scaling by `factor` in [0.5, 2].
DualChannelWindow speed(DualChannelWindow win, double factor);
/// Zeroes exactly round(fraction * L) distinct samples in each channel.
/// Throws Error{FractionOutOfRange} outside [0, 0.10].
DualChannelWindow random_mask(DualChannelWindow win, double fraction, Rng& rng);

// Noise stage.
/// Adds Gaussian noise scaled so each channel hits `snr_db` exactly.
/// +inf is a no-op. Throws Error{SilentInput} if a channel has zero RMS.
DualChannelWindow add_white_noise(DualChannelWindow win, double snr_db, Rng& rng);
/// Adds `noise` scaled to `snr_db` relative to channel 0; both channels get
/// the same scale. Throws Error{ShapeMismatch}.
DualChannelWindow mix_background(DualChannelWindow win, const DualChannelWindow& noise,
                                 double snr_db);

/// Copy `copy_index` (1-based) of window `window_index` under `plan`. Only a
/// function of its arguments, so copies can be produced in any order.
DualChannelWindow augment_copy(const DualChannelWindow& win, const AugmentPlan& plan,
                               std::span<const DualChannelWindow> noise_pool,
                               std::uint64_t window_index, int copy_index);

/// For each input window: the original followed by `copies_per_clip`
/// augmented variants. Throws Error{EmptyNoisePool}.
std::vector<DualChannelWindow> apply_plan(std::span<const DualChannelWindow> windows,
                                          const AugmentPlan& plan,
                                          std::span<const DualChannelWindow> noise_pool);

/// Loads every 2-channel WAV in `dir` (sorted by name), decimates to
/// `rate_hz` and slices into windows.
std::vector<DualChannelWindow> load_noise_pool(const std::filesystem::path& dir, int rate_hz);

}  // namespace earcough::augment

#endif  // EARCOUGH_AUGMENT_HPP_
