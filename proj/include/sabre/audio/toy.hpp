#pragma once

#include <cstdint>
#include <string>

#include "sabre/audio/manifest.hpp"

namespace sabre::audio {

// Built-in synthetic corpus: class-dependent tone/chirp/noise mixtures,
// 1-second mono clips. Everything is derived from the seed, so two
// generations with the same config are byte-identical on disk.
struct ToyCorpusConfig {
  int classes = 3;          // 2..4
  int clips_per_class = 50;
  int sample_rate_hz = 8000;
  double duration_s = 1.0;
  int folds = 5;
  double noise_level = 0.05;
  std::uint64_t seed = 7;
};

// Writes WAV files plus manifest.csv under root_dir and returns the manifest.
DatasetManifest generate_toy_corpus(const std::string& root_dir, const ToyCorpusConfig& cfg);

}  // namespace sabre::audio
