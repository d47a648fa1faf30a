#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sabre/errors.hpp"

namespace sabre::audio {

// Mono waveform plus provenance. Immutable after construction in practice:
// nothing in the toolkit mutates a clip in place.
struct AudioClip {
  std::vector<double> samples;  // amplitudes in [-1, 1]
  int sample_rate_hz = 0;
  int label = -1;
  std::string source_id;
  std::optional<double> augmentation_tag;  // pitch factor when augmented

  int length() const { return static_cast<int>(samples.size()); }
  double duration_s() const { return static_cast<double>(samples.size()) / sample_rate_hz; }
};

// Throws if the clip violates its invariants (empty, bad rate, non-finite
// or out-of-range samples).
void validate(const AudioClip& clip);

struct Frame {
  int start = 0;                 // index into the source clip
  std::vector<double> samples;   // contiguous slice of length frame_len
};

// Splits a clip into overlapping frames: count = floor((N-len)/hop)+1.
// No padding; a frame longer than the clip is a degenerate input.
std::vector<Frame> frame(const AudioClip& clip, int frame_len_samples, int hop_samples);

}  // namespace sabre::audio
