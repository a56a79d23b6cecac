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

#include "earcough/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "earcough/dsp.hpp"
#include "earcough/error.hpp"
#include "earcough/spectral.hpp"
#include "earcough/wav.hpp"

namespace earcough::synth {
namespace {

using Eigen::Index;

constexpr double kPi = std::numbers::pi;
constexpr double kCoughBandLo = 350.0;
constexpr double kCoughBandHi = 4000.0;

// Overall level budget: sources are authored around full scale and then
// placed at these levels so the boosted feedback channel never clips.
constexpr float kSubjectLevel = 0.35f;
constexpr double kSelfNoiseDbfs = -85.0;
constexpr double kQuietRoomDbfs = -60.0;
constexpr double kNoisyRoomDbfs = -45.0;
constexpr double kLeadIn = 1.0;
constexpr double kTail = 1.0;
// Footsteps under a walking cough recording, relative to the wearer level.
constexpr float kStepLevel = 0.25f;
constexpr double kMinFlatIsolationDb = 12.0;
// Extra room left between wearer events when other people cough nearby.
constexpr double kCrowdLeadIn = 3.0;
constexpr double kCrowdGap = 3.0;

double db_to_gain(double db) { return std::pow(10.0, db / 20.0); }

Index to_samples(double seconds, int rate) { return static_cast<Index>(std::llround(seconds * rate)); }

double snap_ms(double seconds) { return std::round(seconds * 1000.0) / 1000.0; }

MonoSignal white(Index n, Rng& rng) {
  std::normal_distribution<float> g(0.0f, 1.0f);
  MonoSignal x(n);
  for (Index i = 0; i < n; ++i) x(i) = g(rng);
  return x;
}

MonoSignal unit_rms(MonoSignal x) {
  const double r = dsp::rms(x);
  if (r > 0.0) x /= static_cast<float>(r);
  return x;
}

MonoSignal peak_normalize(MonoSignal x, double peak) {
  const float m = x.cwiseAbs().maxCoeff();
  if (m > 0.0f) x *= static_cast<float>(peak / m);
  return x;
}

MonoSignal pink(Index n, int rate, Rng& rng) {
  return unit_rms(spectral::shape(white(n, rng), rate, [](double f) { return 1.0 / std::sqrt(std::max(f, 20.0)); }));
}

// Lognormal with the requested mean and standard deviation, clamped.
double sample_duration(Rng& rng, double mean, double sd, double lo, double hi) {
  const double s2 = std::log(1.0 + (sd * sd) / (mean * mean));
  const double mu = std::log(mean) - 0.5 * s2;
  std::lognormal_distribution<double> d(mu, std::sqrt(s2));
  return std::clamp(d(rng), lo, hi);
}

// Second-order resonator (constant 0 dB peak gain band-pass), direct form I.
class Biquad {
 public:
  static Biquad bandpass(double f0, double q, int rate) {
    const double w = 2.0 * kPi * f0 / rate;
    const double alpha = std::sin(w) / (2.0 * q);
    const double a0 = 1.0 + alpha;
    Biquad b;
    b.b0_ = alpha / a0;
    b.b1_ = 0.0;
    b.b2_ = -alpha / a0;
    b.a1_ = -2.0 * std::cos(w) / a0;
    b.a2_ = (1.0 - alpha) / a0;
    return b;
  }

  MonoSignal run(const MonoSignal& x) {
    MonoSignal y(x.size());
    for (Index i = 0; i < x.size(); ++i) {
      const double v = b0_ * x(i) + b1_ * x1_ + b2_ * x2_ - a1_ * y1_ - a2_ * y2_;
      x2_ = x1_;
      x1_ = x(i);
      y2_ = y1_;
      y1_ = v;
      y(i) = static_cast<float>(v);
    }
    return y;
  }

 private:
  double b0_ = 1, b1_ = 0, b2_ = 0, a1_ = 0, a2_ = 0;
  double x1_ = 0, x2_ = 0, y1_ = 0, y2_ = 0;
};

void add_at(MonoSignal& dst, const MonoSignal& src, Index start, float gain = 1.0f) {
  if (start >= dst.size()) return;
  const Index n = std::min(src.size(), dst.size() - start);
  dst.segment(start, n) += gain * src.head(n);
}

void add_at(DualSignal& dst, const DualSignal& src, Index start) {
  if (start >= dst.cols()) return;
  const Index n = std::min(src.cols(), dst.cols() - start);
  dst.middleCols(start, n) += src.leftCols(n);
}

// Raised-cosine fade at both ends to avoid clicks.
void taper(MonoSignal& x, Index fade) {
  fade = std::min(fade, x.size() / 2);
  for (Index i = 0; i < fade; ++i) {
    const float g = static_cast<float>(0.5 - 0.5 * std::cos(kPi * static_cast<double>(i) / fade));
    x(i) *= g;
    x(x.size() - 1 - i) *= g;
  }
}

// Naive sawtooth at a slowly varying f0; aliasing is irrelevant at these f0s.
MonoSignal voiced_source(Index n, int rate, double f0, double vibrato_hz, double vibrato_depth, Rng& rng) {
  MonoSignal x(n);
  double phase = uniform(rng, 0.0, 1.0);
  const double vib_phase = uniform(rng, 0.0, 2.0 * kPi);
  for (Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    const double f = f0 * (1.0 + vibrato_depth * std::sin(2.0 * kPi * vibrato_hz * t + vib_phase));
    phase += f / rate;
    phase -= std::floor(phase);
    x(i) = static_cast<float>(2.0 * phase - 1.0);
  }
  return x;
}

MonoSignal formants(const MonoSignal& src, int rate, double f1, double f2) {
  const double nyq = 0.45 * rate;
  MonoSignal y = Biquad::bandpass(std::min(f1, nyq), 5.0, rate).run(src);
  y += 0.6f * Biquad::bandpass(std::min(f2, nyq), 8.0, rate).run(src);
  return y;
}

MonoSignal cough_pulse(double duration_s, int rate, Rng& rng) {
  const Index n = std::max<Index>(to_samples(duration_s, rate), 8);
  const double tilt = uniform(rng, -1.0, 1.0);
  const double attack = uniform(rng, 0.004, 0.015);
  const double primary_end = 0.6 * duration_s;
  const double tau = 0.55 * duration_s / std::log(db_to_gain(25.0));
  const double voiced_start = 0.45 * duration_s;
  const double voiced_len = duration_s - voiced_start;
  const double resonance = uniform(rng, 600.0, 1500.0);

  MonoSignal burst = unit_rms(spectral::bandpass(spectral::shape(white(n, rng), rate, [tilt](double f) {
    return std::pow(std::max(f, 100.0) / 1000.0, tilt);
  }), rate, kCoughBandLo, kCoughBandHi));
  MonoSignal voiced = unit_rms(spectral::shape(white(n, rng), rate, [resonance](double f) {
    const double d = (f - resonance) / 300.0;
    return std::exp(-0.5 * d * d);
  }));

  MonoSignal x(n);
  for (Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    double e1 = 0.0;
    if (t < attack) {
      e1 = t / attack;
    } else if (t < primary_end) {
      e1 = std::exp(-(t - attack) / tau);
    }
    double e2 = 0.0;
    if (t >= voiced_start) {
      const double s = std::sin(kPi * (t - voiced_start) / voiced_len);
      e2 = 0.3 * s * s;
    }
    x(i) = static_cast<float>(e1 * burst(i) + e2 * voiced(i));
  }
  return spectral::bandpass(x, rate, kCoughBandLo, kCoughBandHi);
}

MonoSignal continuous_cough(double duration_s, int rate, Rng& rng) {
  const int pulses = duration_s < 0.5 ? 2 : (duration_s < 1.0 ? 3 : 4);
  const double gap = 0.03;
  const double each = (duration_s - gap * (pulses - 1)) / pulses;
  MonoSignal x = MonoSignal::Zero(to_samples(duration_s, rate));
  double t = 0.0;
  for (int p = 0; p < pulses; ++p) {
    const double d = (p == pulses - 1) ? duration_s - t : each * uniform(rng, 0.85, 1.15);
    MonoSignal pulse = cough_pulse(std::max(d, 0.06), rate, rng);
    add_at(x, pulse, to_samples(t, rate), static_cast<float>(uniform(rng, 0.6, 1.0)));
    t += d + gap;
    if (t >= duration_s) break;
  }
  return peak_normalize(x, uniform(rng, 0.3, 0.9));
}

MonoSignal laugh(double duration_s, int rate, Rng& rng) {
  const Index n = to_samples(duration_s, rate);
  MonoSignal x = MonoSignal::Zero(n);
  const double f0 = uniform(rng, 200.0, 320.0);
  double t = 0.0;
  double amp = 1.0;
  while (t < duration_s - 0.08) {
    const double len = std::min(uniform(rng, 0.08, 0.15), duration_s - t);
    const Index m = to_samples(len, rate);
    MonoSignal src = voiced_source(m, rate, f0 * uniform(rng, 0.9, 1.1), 6.0, 0.03, rng) + 0.3f * white(m, rng);
    MonoSignal s = formants(src, rate, uniform(rng, 650.0, 850.0), uniform(rng, 1100.0, 1400.0));
    for (Index i = 0; i < m; ++i) s(i) *= static_cast<float>(std::sin(kPi * i / static_cast<double>(m)));
    add_at(x, unit_rms(s), to_samples(t, rate), static_cast<float>(amp));
    t += len + uniform(rng, 0.06, 0.12);
    amp *= uniform(rng, 0.85, 1.0);
  }
  return peak_normalize(x, uniform(rng, 0.2, 0.5));
}

MonoSignal speech(double duration_s, int rate, Rng& rng) {
  const Index n = to_samples(duration_s, rate);
  MonoSignal x = MonoSignal::Zero(n);
  const double f0 = uniform(rng, 100.0, 190.0);
  double t = uniform(rng, 0.0, 0.2);
  int syllable = 0;
  while (t < duration_s - 0.1) {
    const double len = std::min(uniform(rng, 0.08, 0.25), duration_s - t);
    const Index m = to_samples(len, rate);
    MonoSignal s;
    if (uniform(rng, 0.0, 1.0) < 0.25) {
      // Fricative.
      s = spectral::bandpass(white(m, rng), rate, 2500.0, std::min(7000.0, 0.45 * rate));
      s = 0.4f * unit_rms(s);
    } else {
      MonoSignal src = voiced_source(m, rate, f0 * uniform(rng, 0.85, 1.2), 4.0, 0.05, rng);
      s = unit_rms(formants(src, rate, uniform(rng, 300.0, 800.0), uniform(rng, 900.0, 2300.0)));
    }
    for (Index i = 0; i < m; ++i) s(i) *= static_cast<float>(std::sin(kPi * i / static_cast<double>(m)));
    add_at(x, s, to_samples(t, rate), static_cast<float>(uniform(rng, 0.5, 1.0)));
    t += len + uniform(rng, 0.03, 0.12);
    if (++syllable % 8 == 0) t += uniform(rng, 0.3, 0.6);
  }
  return peak_normalize(x, uniform(rng, 0.15, 0.4));
}

MonoSignal thud(int rate, double f, double tau, Rng& rng) {
  const Index m = to_samples(5 * tau, rate);
  MonoSignal s(m);
  const double ph = uniform(rng, 0.0, 2.0 * kPi);
  for (Index i = 0; i < m; ++i) {
    const double t = static_cast<double>(i) / rate;
    s(i) = static_cast<float>(std::exp(-t / tau) * std::sin(2.0 * kPi * f * t + ph));
  }
  return s;
}

MonoSignal chewing(double duration_s, int rate, Rng& rng) {
  const Index n = to_samples(duration_s, rate);
  MonoSignal x = MonoSignal::Zero(n);
  // Initial bite crack.
  MonoSignal crack = spectral::bandpass(white(to_samples(0.03, rate), rng), rate, 800.0, 0.45 * rate);
  taper(crack, to_samples(0.002, rate));
  add_at(x, unit_rms(crack), 0, 1.5f);
  double t = uniform(rng, 0.3, 0.5);
  while (t < duration_s - 0.2) {
    add_at(x, thud(rate, uniform(rng, 80.0, 150.0), 0.015, rng), to_samples(t, rate), 1.2f);
    const int crunches = std::uniform_int_distribution<int>(1, 4)(rng);
    for (int c = 0; c < crunches; ++c) {
      const double len = uniform(rng, 0.005, 0.02);
      MonoSignal cr = spectral::bandpass(white(to_samples(len, rate), rng), rate, 1000.0, 0.45 * rate);
      taper(cr, to_samples(0.001, rate));
      add_at(x, unit_rms(cr), to_samples(t + uniform(rng, 0.0, 0.12), rate), static_cast<float>(uniform(rng, 0.3, 0.9)));
    }
    t += uniform(rng, 0.55, 0.8);
  }
  return peak_normalize(x, uniform(rng, 0.2, 0.5));
}

MonoSignal sip(double duration_s, int rate, Rng& rng) {
  const Index n = to_samples(duration_s, rate);
  MonoSignal x = spectral::bandpass(white(n, rng), rate, 100.0, 1200.0);
  x = 0.15f * unit_rms(x);
  taper(x, std::min<Index>(to_samples(0.02, rate), n / 2));
  add_at(x, thud(rate, uniform(rng, 150.0, 300.0), 0.02, rng), to_samples(duration_s * uniform(rng, 0.3, 0.7), rate));
  const int bubbles = std::uniform_int_distribution<int>(2, 4)(rng);
  for (int b = 0; b < bubbles; ++b) {
    const double len = uniform(rng, 0.02, 0.04);
    const Index m = to_samples(len, rate);
    const double f_lo = uniform(rng, 300.0, 500.0), f_hi = uniform(rng, 600.0, 900.0);
    MonoSignal chirp(m);
    double ph = 0.0;
    for (Index i = 0; i < m; ++i) {
      const double frac = static_cast<double>(i) / m;
      ph += 2.0 * kPi * (f_lo + (f_hi - f_lo) * frac) / rate;
      chirp(i) = static_cast<float>(std::sin(ph) * std::sin(kPi * frac));
    }
    add_at(x, chirp, to_samples(uniform(rng, 0.0, std::max(0.0, duration_s - len)), rate), 0.5f);
  }
  return peak_normalize(x, uniform(rng, 0.1, 0.3));
}

MonoSignal head_rumble(double duration_s, int rate, Rng& rng) {
  const Index n = to_samples(duration_s, rate);
  MonoSignal lf = unit_rms(spectral::bandpass(white(n, rng), rate, 10.0, 120.0));
  MonoSignal rub = 0.2f * unit_rms(spectral::bandpass(white(n, rng), rate, 200.0, 2000.0));
  const double mod_f = uniform(rng, 0.5, 1.0);
  const double ph = uniform(rng, 0.0, 2.0 * kPi);
  MonoSignal x(n);
  for (Index i = 0; i < n; ++i) {
    const double m = 0.5 + 0.5 * std::sin(2.0 * kPi * mod_f * i / rate + ph);
    x(i) = static_cast<float>(m) * (lf(i) + rub(i));
  }
  taper(x, to_samples(0.1, rate));
  return peak_normalize(x, uniform(rng, 0.1, 0.25));
}

MonoSignal footsteps(double duration_s, int rate, Rng& rng) {
  MonoSignal x = MonoSignal::Zero(to_samples(duration_s, rate));
  const double period = uniform(rng, 0.5, 0.6);
  double t = uniform(rng, 0.0, period);
  while (t < duration_s) {
    add_at(x, thud(rate, uniform(rng, 50.0, 120.0), 0.03, rng), to_samples(t, rate),
           static_cast<float>(uniform(rng, 0.7, 1.0)));
    t += period * uniform(rng, 0.95, 1.05);
  }
  return peak_normalize(x, uniform(rng, 0.08, 0.15));
}

MonoSignal music(double duration_s, int rate, Rng& rng) {
  const Index n = to_samples(duration_s, rate);
  MonoSignal x = MonoSignal::Zero(n);
  double t = 0.0;
  while (t < duration_s) {
    const double len = uniform(rng, 0.4, 1.0);
    const Index start = to_samples(t, rate);
    const Index m = std::min(to_samples(len, rate), n - start);
    const double root = 110.0 * std::pow(2.0, std::uniform_int_distribution<int>(0, 24)(rng) / 12.0);
    for (double ratio : {1.0, 1.26, 1.5}) {
      for (int h = 1; h <= 4; ++h) {
        const double f = root * ratio * h;
        if (f > 0.45 * rate) break;
        for (Index i = 0; i < m; ++i) {
          const double tt = static_cast<double>(i) / rate;
          x(start + i) += static_cast<float>(std::sin(2.0 * kPi * f * tt) * std::exp(-2.0 * tt) / h);
        }
      }
    }
    t += len;
  }
  return unit_rms(x);
}

MonoSignal noisy_room(double duration_s, int rate, Rng& rng) {
  const Index n = to_samples(duration_s, rate);
  MonoSignal x = pink(n, rate, rng);
  x += 0.7f * music(duration_s, rate, rng);
  x += 0.6f * unit_rms(speech(duration_s, rate, rng));
  // Sparse clatter and knocks.
  const int events = static_cast<int>(duration_s / 2.0);
  for (int e = 0; e < events; ++e) {
    MonoSignal k = thud(rate, uniform(rng, 80.0, 400.0), 0.02, rng);
    add_at(x, k, to_samples(uniform(rng, 0.0, duration_s), rate), static_cast<float>(uniform(rng, 1.0, 3.0)));
  }
  return unit_rms(x);
}

struct GroupPlan {
  EventLabel label;
  Posture posture;
  int count;
  double mean_s;
  double sd_s;
  double min_s;
  double max_s;
  bool scaled;
  double gap_lo;
  double gap_hi;
};

// Per-event duration statistics follow the collected-data summary table;
// `scaled` groups are shortened by SynthConfig::activity_time_scale.
constexpr std::array<GroupPlan, kGroupCount> kGroups = {{
    {EventLabel::single_cough_sitting, Posture::sitting, 10, 0.384, 0.291, 0.1, 2.0, false, 1.5, 3.0},
    {EventLabel::continuous_cough_sitting, Posture::sitting, 10, 0.796, 0.228, 0.3, 2.0, false, 1.5, 3.0},
    {EventLabel::bite_apple, Posture::sitting, 5, 10.264, 3.783, 5.0, 20.0, true, 1.0, 2.0},
    {EventLabel::sip_water, Posture::sitting, 5, 0.601, 0.594, 0.15, 3.0, false, 1.5, 3.0},
    {EventLabel::laughing, Posture::sitting, 5, 1.823, 1.590, 0.4, 6.0, false, 1.5, 4.0},
    {EventLabel::reading, Posture::sitting, 1, 88.023, 10.510, 60.0, 120.0, true, 0.0, 0.0},
    {EventLabel::head_movement, Posture::sitting, 1, 21.050, 6.762, 10.0, 40.0, true, 0.0, 0.0},
    {EventLabel::walking, Posture::walking, 1, 34.560, 4.833, 20.0, 50.0, true, 0.0, 0.0},
    {EventLabel::single_cough_walking, Posture::walking, 10, 0.515, 0.250, 0.1, 2.0, false, 1.5, 3.0},
    {EventLabel::continuous_cough_walking, Posture::walking, 10, 0.682, 0.293, 0.3, 2.0, false, 1.5, 3.0},
}};

MonoSignal render_activity(EventLabel label, double duration_s, int rate, Rng& rng) {
  switch (label) {
    case EventLabel::single_cough_sitting:
    case EventLabel::single_cough_walking:
      return synth_cough(duration_s, rate, rng);
    case EventLabel::continuous_cough_sitting:
    case EventLabel::continuous_cough_walking:
      return continuous_cough(duration_s, rate, rng);
    case EventLabel::bite_apple: return chewing(duration_s, rate, rng);
    case EventLabel::sip_water: return sip(duration_s, rate, rng);
    case EventLabel::laughing: return laugh(duration_s, rate, rng);
    case EventLabel::reading: return speech(duration_s, rate, rng);
    case EventLabel::head_movement: return head_rumble(duration_s, rate, rng);
    case EventLabel::walking: return footsteps(duration_s, rate, rng);
    case EventLabel::environmental_cough: return synth_cough(duration_s, rate, rng);
    case EventLabel::background_noise: return pink(to_samples(duration_s, rate), rate, rng);
  }
  return MonoSignal::Zero(to_samples(duration_s, rate));
}

bool overlaps(double a0, double a1, double b0, double b1) { return a0 < b1 && b0 < a1; }

// Environmental coughs fill the free time densely without touching any
// wearer cough (guarded by 150 ms on either side).
std::vector<AnnotatedSegment> place_environmental_coughs(const std::vector<AnnotatedSegment>& events,
                                                         double length_s, Rng& rng) {
  // Keep clear of every wearer event so the far-field cough is what the
  // feedback microphone hears inside its segment.
  constexpr double kGuard = 0.15;
  std::vector<AnnotatedSegment> placed;
  double t = uniform(rng, 0.2, 0.6);
  while (true) {
    const double d = snap_ms(sample_duration(rng, 1.166, 0.323, 0.4, 2.0));
    if (t + d > length_s - 0.3) break;
    bool moved = false;
    for (const auto& e : events) {
      if (overlaps(t, t + d, e.start_s - kGuard, e.end_s + kGuard)) {
        t = e.end_s + kGuard;
        moved = true;
        break;
      }
    }
    if (moved) continue;
    placed.push_back({snap_ms(t), snap_ms(t + d), EventLabel::environmental_cough});
    t += d + uniform(rng, 0.2, 0.8);
  }
  return placed;
}

}  // namespace

void ChannelModel::validate() const {
  if (env_isolation_db.lo < 10.0) {
    throw Error(Errc::InvalidArgument, "environmental isolation lower bound must be >= 10 dB");
  }
  if (env_isolation_db.lo > env_isolation_db.hi || env_distance_db.lo > env_distance_db.hi) {
    throw Error(Errc::InvalidArgument, "channel model interval has lo > hi");
  }
  if (env_lowpass_hz <= 0.0 || subject_lowshelf_hz <= 0.0 || env_delay_max_samples_48k < 0) {
    throw Error(Errc::InvalidArgument, "channel model frequencies must be positive");
  }
}

MonoSignal synth_cough(double duration_s, int rate_hz, Rng& rng) {
  if (duration_s < 0.1 - 1e-9 || duration_s > 2.0 + 1e-9) {
    throw Error(Errc::InvalidArgument, "cough duration must lie within [0.1, 2.0] s");
  }
  return peak_normalize(cough_pulse(duration_s, rate_hz, rng), uniform(rng, 0.3, 0.9));
}

DualSignal render_subject(const MonoSignal& mono, int rate_hz, const ChannelModel& model, Rng& rng) {
  const double jitter_db = uniform(rng, -1.0, 1.0);
  const double g = db_to_gain(std::max(0.0, model.subject_fb_gain_db + jitter_db));
  const double corner = model.subject_lowshelf_hz, boost = model.subject_lowshelf_db;
  DualSignal out(2, mono.size());
  out.row(kFeedForward) = mono.transpose();
  out.row(kFeedback) = spectral::shape(mono, rate_hz, [&](double f) {
                         return g * spectral::lowshelf_gain(f, corner, boost);
                       }).transpose();
  return out;
}

EnvironmentRender render_environment(const MonoSignal& mono, int rate_hz, const ChannelModel& model,
                                     Rng& rng) {
  const double distance = db_to_gain(uniform(rng, model.env_distance_db.lo, model.env_distance_db.hi));
  EnvironmentRender r;
  r.isolation_db = uniform(rng, model.env_isolation_db.lo, model.env_isolation_db.hi);
  const int max_delay = static_cast<int>(
      std::lround(static_cast<double>(model.env_delay_max_samples_48k) * rate_hz / 48000.0));
  r.delay_samples = std::uniform_int_distribution<int>(0, max_delay)(rng);

  // Calibrate so that band-limited cough-band material sees the drawn
  // isolation; content above the corner is attenuated further.
  double band_power = 0.0;
  constexpr int kSteps = 2000;
  for (int i = 0; i < kSteps; ++i) {
    const double f = kCoughBandLo + (kCoughBandHi - kCoughBandLo) * (i + 0.5) / kSteps;
    const double g = spectral::lowpass_gain(f, model.env_lowpass_hz, model.env_lowpass_order);
    band_power += g * g / kSteps;
  }
  // The broadband part of the attenuation never drops below kMinFlatIsolation,
  // so even material under the corner loses that much on the feedback side.
  const double band_loss_db = -10.0 * std::log10(band_power);
  const double flat_db = std::max(r.isolation_db - band_loss_db, kMinFlatIsolationDb);
  r.isolation_db = flat_db + band_loss_db;
  const double iso = db_to_gain(-flat_db);
  const double corner = model.env_lowpass_hz;
  const int order = model.env_lowpass_order;

  const MonoSignal near = mono * static_cast<float>(distance);
  const MonoSignal inner = spectral::shape(near, rate_hz, [&](double f) {
    return iso * spectral::lowpass_gain(f, corner, order);
  });
  r.signal = DualSignal::Zero(2, mono.size());
  r.signal.row(kFeedForward) = near.transpose();
  const Index d = std::min<Index>(r.delay_samples, mono.size());
  r.signal.row(kFeedback).tail(mono.size() - d) = inner.head(mono.size() - d).transpose();
  return r;
}

std::string_view group_name(int group) { return to_string(kGroups.at(static_cast<std::size_t>(group)).label); }

namespace {

Rng group_rng(const SynthConfig& config, int user, Environment env, int group, std::uint64_t stream) {
  return make_rng(config.seed, {static_cast<std::uint64_t>(user), static_cast<std::uint64_t>(env),
                                static_cast<std::uint64_t>(group), stream});
}

}  // namespace

GroupTimeline group_timeline(const SynthConfig& config, int user, Environment env, int group) {
  const GroupPlan& plan = kGroups.at(static_cast<std::size_t>(group));
  Rng rng = group_rng(config, user, env, group, 0);
  GroupTimeline tl;
  tl.posture = plan.posture;
  const bool crowd = env == Environment::env_cough && plan.posture == Posture::sitting;
  std::vector<AnnotatedSegment> events;
  double t = crowd ? kCrowdLeadIn : kLeadIn;
  for (int i = 0; i < plan.count; ++i) {
    const double scale = plan.scaled ? config.activity_time_scale : 1.0;
    double d = sample_duration(rng, plan.mean_s, plan.sd_s, plan.min_s, plan.max_s) * scale;
    d = snap_ms(std::max(d, 0.1));
    events.push_back({snap_ms(t), snap_ms(t + d), plan.label});
    const double extra = crowd ? kCrowdGap : 0.0;
    t = events.back().end_s + (i + 1 < plan.count ? uniform(rng, plan.gap_lo, plan.gap_hi) + extra : 0.0);
  }
  tl.length_s = snap_ms(t + (crowd ? kCrowdLeadIn : kTail));
  tl.events = events;
  // Footsteps run under the whole of a walking recording, so other people's
  // coughs are only staged while the wearer is seated.
  if (crowd) {
    tl.environmental = place_environmental_coughs(events, tl.length_s, rng);
  }
  return tl;
}

RenderedRecording render_group(const SynthConfig& config, int user, Environment env, int group) {
  const GroupPlan& plan = kGroups.at(static_cast<std::size_t>(group));
  const int rate = config.sample_rate_hz;
  Rng sources = group_rng(config, user, env, group, 1);
  Rng channel = group_rng(config, user, env, group, 2);
  Rng background = group_rng(config, user, env, group, 3);

  const GroupTimeline tl = group_timeline(config, user, env, group);
  const double length_s = tl.length_s;
  const Index n = to_samples(length_s, rate);

  RenderedRecording out;
  out.posture = plan.posture;
  out.recording.sample_rate_hz = rate;
  out.recording.source_id = "user" + std::to_string(user) + "_" + std::string(to_string(env)) + "_" +
                            std::string(group_name(group));
  DualSignal audio = DualSignal::Zero(2, n);

  // Room background, always environmental.
  {
    const double level = env == Environment::noisy ? kNoisyRoomDbfs : kQuietRoomDbfs;
    MonoSignal bg = env == Environment::noisy ? noisy_room(length_s, rate, background) : pink(n, rate, background);
    bg *= static_cast<float>(db_to_gain(level));
    ChannelModel room = config.channel;
    room.env_distance_db = {0.0, 0.0};
    audio += render_environment(bg, rate, room, channel).signal;
    if (env == Environment::noisy) out.annotations.push_back({0.0, length_s, EventLabel::background_noise});
  }

  // Footsteps underneath every walking-posture group.
  if (plan.posture == Posture::walking && plan.label != EventLabel::walking) {
    MonoSignal steps = footsteps(length_s, rate, sources) * (kSubjectLevel * kStepLevel);
    audio += render_subject(steps, rate, config.channel, channel);
  }

  for (const auto& e : tl.events) {
    MonoSignal mono = render_activity(e.label, e.duration_s(), rate, sources) * kSubjectLevel;
    add_at(audio, render_subject(mono, rate, config.channel, channel), to_samples(e.start_s, rate));
    out.annotations.push_back(e);
  }

  for (const auto& c : tl.environmental) {
    MonoSignal mono = synth_cough(c.duration_s(), rate, sources) * kSubjectLevel;
    add_at(audio, render_environment(mono, rate, config.channel, channel).signal, to_samples(c.start_s, rate));
    out.annotations.push_back(c);
  }

  // Independent microphone self-noise.
  const float self_noise = static_cast<float>(db_to_gain(kSelfNoiseDbfs));
  audio.row(0) += self_noise * white(n, background).transpose();
  audio.row(1) += self_noise * white(n, background).transpose();
  audio = audio.cwiseMax(-1.0f).cwiseMin(32767.0f / 32768.0f);

  std::sort(out.annotations.begin(), out.annotations.end(),
            [](const AnnotatedSegment& a, const AnnotatedSegment& b) { return a.start_s < b.start_s; });
  out.recording.samples = std::move(audio);
  return out;
}

DatasetManifest generate_dataset(const SynthConfig& config, const std::filesystem::path& out_dir) {
  if (config.n_users < 1) throw Error(Errc::InvalidArgument, "n_users must be >= 1");
  if (!is_supported_rate(config.sample_rate_hz)) {
    throw Error(Errc::UnsupportedRate, std::to_string(config.sample_rate_hz) + " Hz");
  }
  config.channel.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(Errc::IoFailure, "cannot create " + out_dir.string() + ": " + ec.message());

  DatasetManifest manifest;
  manifest.seed = config.seed;
  for (int user = 1; user <= config.n_users; ++user) {
    for (Environment env : {Environment::quiet, Environment::noisy, Environment::env_cough}) {
      char user_dir[16];
      std::snprintf(user_dir, sizeof(user_dir), "user%02d", user);
      const std::filesystem::path rel_dir = std::filesystem::path(user_dir) / std::string(to_string(env));
      std::filesystem::create_directories(out_dir / rel_dir, ec);
      if (ec) throw Error(Errc::IoFailure, "cannot create " + (out_dir / rel_dir).string());
      for (int group = 0; group < kGroupCount; ++group) {
        RenderedRecording r = render_group(config, user, env, group);
        char stem[64];
        std::snprintf(stem, sizeof(stem), "g%02d_%s", group, std::string(group_name(group)).c_str());
        const auto wav_rel = rel_dir / (std::string(stem) + ".wav");
        const auto tsv_rel = rel_dir / (std::string(stem) + ".tsv");
        dsp::save_recording(r.recording, out_dir / wav_rel, wav::SampleFormat::Pcm16);
        write_annotations(out_dir / tsv_rel, r.annotations);
        manifest.entries.push_back({wav_rel.generic_string(), tsv_rel.generic_string(), user, env, r.posture});
      }
    }
  }
  write_manifest(out_dir / "manifest.json", manifest);
  return manifest;
}

std::vector<DualChannelWindow> synth_noise_pool(int count, int rate_hz, std::uint64_t seed,
                                                const ChannelModel& model) {
  std::vector<DualChannelWindow> pool;
  const Index len = window_length(rate_hz);
  for (int i = 0; i < count; ++i) {
    Rng rng = make_rng(seed, {0x6e6f697365ull, static_cast<std::uint64_t>(i)});
    MonoSignal mono;
    switch (i % 4) {
      case 0: mono = pink(len, rate_hz, rng); break;
      case 1: mono = music(kWindowSeconds, rate_hz, rng); break;
      case 2: mono = unit_rms(speech(kWindowSeconds, rate_hz, rng)); break;
      default: mono = noisy_room(kWindowSeconds, rate_hz, rng); break;
    }
    DualChannelWindow w;
    w.data = render_environment(mono.head(len), rate_hz, model, rng).signal;
    w.sample_rate_hz = rate_hz;
    w.origin = {"noise" + std::to_string(i), 0.0};
    pool.push_back(std::move(w));
  }
  return pool;
}

void write_noise_pool(const std::filesystem::path& dir, std::span<const DualChannelWindow> clips) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoFailure, "cannot create " + dir.string());
  for (std::size_t i = 0; i < clips.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "noise%04zu.wav", i);
    wav::WavData data;
    data.channels = clips[i].data;
    data.sample_rate_hz = clips[i].sample_rate_hz;
    data.format = wav::SampleFormat::Float32;
    wav::write(dir / name, data);
  }
}

RenderedRecording render_cough_demo(double duration_s, int n_coughs, int rate_hz, std::uint64_t seed,
                                    const ChannelModel& model) {
  Rng rng = make_rng(seed, {0x64656d6full});
  const Index n = to_samples(duration_s, rate_hz);
  RenderedRecording out;
  out.recording.sample_rate_hz = rate_hz;
  out.recording.source_id = "demo";
  DualSignal audio = DualSignal::Zero(2, n);
  MonoSignal bg = pink(n, rate_hz, rng) * static_cast<float>(db_to_gain(kQuietRoomDbfs));
  audio += render_environment(bg, rate_hz, model, rng).signal;

  const double slot = duration_s / n_coughs;
  for (int i = 0; i < n_coughs; ++i) {
    const double d = snap_ms(uniform(rng, 0.3, 0.6));
    const double start = snap_ms(i * slot + uniform(rng, 0.5, slot - d - 0.5));
    MonoSignal mono = synth_cough(d, rate_hz, rng) * kSubjectLevel;
    add_at(audio, render_subject(mono, rate_hz, model, rng), to_samples(start, rate_hz));
    out.annotations.push_back({start, snap_ms(start + d), EventLabel::single_cough_sitting});
  }
  const float self_noise = static_cast<float>(db_to_gain(kSelfNoiseDbfs));
  audio.row(0) += self_noise * white(n, rng).transpose();
  audio.row(1) += self_noise * white(n, rng).transpose();
  out.recording.samples = audio.cwiseMax(-1.0f).cwiseMin(32767.0f / 32768.0f);
  return out;
}

}  // namespace earcough::synth
