#include "sabre/audio/clip.hpp"

#include <cmath>

namespace sabre::audio {

void validate(const AudioClip& clip) {
  if (clip.samples.empty()) throw DegenerateInputError("AudioClip: empty sample buffer");
  if (clip.sample_rate_hz <= 0) throw ConfigError("AudioClip: sample_rate_hz must be positive");
  for (double s : clip.samples) {
    if (!std::isfinite(s)) throw FormatError("AudioClip: non-finite sample");
    if (s < -1.0 || s > 1.0) throw FormatError("AudioClip: sample outside [-1, 1]");
  }
}

std::vector<Frame> frame(const AudioClip& clip, int frame_len_samples, int hop_samples) {
  if (frame_len_samples <= 0) throw ConfigError("frame: frame_len_samples must be positive");
  if (hop_samples < 1) throw ConfigError("frame: hop_samples must be >= 1");
  const int n = clip.length();
  if (frame_len_samples > n)
    throw DegenerateInputError("frame: frame longer than clip (" +
                               std::to_string(frame_len_samples) + " > " + std::to_string(n) + ")");
  const int count = (n - frame_len_samples) / hop_samples + 1;
  std::vector<Frame> out;
  out.reserve(count);
  for (int f = 0; f < count; ++f) {
    Frame fr;
    fr.start = f * hop_samples;
    fr.samples.assign(clip.samples.begin() + fr.start,
                      clip.samples.begin() + fr.start + frame_len_samples);
    out.push_back(std::move(fr));
  }
  return out;
}

}  // namespace sabre::audio
