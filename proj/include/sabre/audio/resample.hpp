#pragma once

#include "sabre/audio/clip.hpp"

namespace sabre::audio {

// Band-limited sample rate conversion (windowed-sinc interpolation).
// Duration is preserved within one sample period. Resampling to the
// input rate returns the clip unchanged.
AudioClip resample(const AudioClip& clip, int target_rate_hz);

// Pitch shift by resampling: the clip is resampled by 1/factor and the
// result reinterpreted at the original rate, so perceived pitch scales by
// `factor` and duration by 1/factor. The augmentation tag records the factor.
AudioClip pitch_shift(const AudioClip& clip, double factor);

}  // namespace sabre::audio
