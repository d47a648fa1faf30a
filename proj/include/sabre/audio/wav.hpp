#pragma once

#include <string>

#include "sabre/audio/clip.hpp"

namespace sabre::audio {

// Reads a PCM WAV file (8/16/24-bit integer or 32-bit float, mono or
// stereo). Stereo is averaged to mono; integer samples are scaled by
// 1/2^(bits-1). Label and augmentation tag are left unset.
AudioClip load_wav(const std::string& path);

// Writes a mono clip as 16-bit PCM. Used by the toy corpus generator and
// by tests; samples are clamped to [-1, 1] before quantization.
void save_wav_16bit(const std::string& path, const AudioClip& clip);

}  // namespace sabre::audio
