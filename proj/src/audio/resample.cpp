#include "sabre/audio/resample.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sabre::audio {

namespace {

// Zero crossings per side of the interpolation kernel. 32 keeps stopband
// rejection comfortably below the 1e-3 round-trip tolerance.
constexpr int kZeroCrossings = 32;

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

// Blackman window over [-1, 1].
double blackman(double u) {
  if (u < -1.0 || u > 1.0) return 0.0;
  const double t = std::numbers::pi * (u + 1.0);  // [0, 2pi]
  return 0.42 - 0.5 * std::cos(t) + 0.08 * std::cos(2.0 * t);
}

}  // namespace

AudioClip resample(const AudioClip& clip, int target_rate_hz) {
  if (target_rate_hz <= 0) throw ConfigError("resample: target_rate_hz must be positive");
  validate(clip);
  if (target_rate_hz == clip.sample_rate_hz) return clip;

  const double ratio = static_cast<double>(target_rate_hz) / clip.sample_rate_hz;
  // Cutoff relative to the input rate; shrink when decimating.
  const double fc = 0.5 * 0.92 * std::min(1.0, ratio);
  const double half_width = kZeroCrossings / (2.0 * fc);

  const int n_in = clip.length();
  const int n_out = std::max(1, static_cast<int>(std::llround(n_in * ratio)));

  AudioClip out;
  out.sample_rate_hz = target_rate_hz;
  out.label = clip.label;
  out.source_id = clip.source_id;
  out.augmentation_tag = clip.augmentation_tag;
  out.samples.resize(n_out);

  for (int i = 0; i < n_out; ++i) {
    const double t = i / ratio;  // position in input samples
    const int k_lo = static_cast<int>(std::ceil(t - half_width));
    const int k_hi = static_cast<int>(std::floor(t + half_width));
    double acc = 0.0, wsum = 0.0;
    for (int k = k_lo; k <= k_hi; ++k) {
      const double d = k - t;
      const double w = 2.0 * fc * sinc(2.0 * fc * d) * blackman(d / half_width);
      wsum += w;
      if (k >= 0 && k < n_in) acc += clip.samples[k] * w;
    }
    // Normalizing by the full kernel sum keeps DC exact in the interior.
    out.samples[i] = std::clamp(wsum != 0.0 ? acc / wsum : 0.0, -1.0, 1.0);
  }
  return out;
}

AudioClip pitch_shift(const AudioClip& clip, double factor) {
  if (factor <= 0.0) throw ConfigError("pitch_shift: factor must be positive");
  if (factor == 1.0) {
    AudioClip out = clip;
    out.augmentation_tag = factor;
    return out;
  }
  const int inter_rate = std::max(1, static_cast<int>(std::llround(clip.sample_rate_hz / factor)));
  AudioClip shifted = resample(clip, inter_rate);
  shifted.sample_rate_hz = clip.sample_rate_hz;  // reinterpret: pitch *= factor
  shifted.augmentation_tag = factor;
  return shifted;
}

}  // namespace sabre::audio
