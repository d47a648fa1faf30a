#include "sabre/audio/toy.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "sabre/audio/wav.hpp"
#include "sabre/common.hpp"

namespace sabre::audio {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// One clip per (class, index), fully determined by the derived seed.
AudioClip synth_clip(int cls, int sample_rate, double duration_s, double noise_level,
                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = static_cast<int>(std::lround(sample_rate * duration_s));

  AudioClip clip;
  clip.sample_rate_hz = sample_rate;
  clip.samples.resize(n, 0.0);

  const double amp = 0.45 + 0.2 * unit(rng);
  const double phase = kTwoPi * unit(rng);

  // Class spectra overlap on purpose: the corpus should be separable by
  // structure (steady line vs. sweep vs. texture) while keeping decision
  // boundaries close enough that attack budgets stay in a sane range.
  switch (cls) {
    case 0: {  // steady low tone with a weak octave harmonic over a faint band bed
      const double f = 500.0 + 180.0 * unit(rng);
      const double h2 = 0.2 + 0.2 * unit(rng);
      const double bed = 0.08 + 0.08 * unit(rng);
      double bf[6], bph[6];
      for (int k = 0; k < 6; ++k) {
        bf[k] = 800.0 + 300.0 * unit(rng);
        bph[k] = kTwoPi * unit(rng);
      }
      for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        double s = std::sin(kTwoPi * f * t + phase) +
                   h2 * std::sin(kTwoPi * 2.0 * f * t + phase);
        for (int k = 0; k < 6; ++k) s += bed * std::sin(kTwoPi * bf[k] * t + bph[k]);
        clip.samples[i] = amp * s;
      }
      break;
    }
    case 1: {  // rising chirp starting inside the tone band
      const double f0 = 480.0 + 160.0 * unit(rng);
      const double f1 = f0 * (1.5 + 0.4 * unit(rng));
      for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        const double u = t / duration_s;
        const double inst = f0 * t + 0.5 * (f1 - f0) * u * t;  // linear sweep
        clip.samples[i] = amp * std::sin(kTwoPi * inst + phase);
      }
      break;
    }
    case 2: {  // rough amplitude-modulated band over a faint tonal line
      const double fc = 750.0 + 350.0 * unit(rng);
      const double mod_hz = 3.0 + 5.0 * unit(rng);
      const double f_line = 500.0 + 180.0 * unit(rng);
      const double line = 0.12 + 0.08 * unit(rng);
      std::normal_distribution<double> g(0.0, 1.0);
      // crude bandpass: random sines clustered around fc
      double f[8], ph[8];
      for (int k = 0; k < 8; ++k) {
        f[k] = fc + 500.0 * (unit(rng) - 0.5);
        ph[k] = kTwoPi * unit(rng);
      }
      for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        double s = 0.0;
        for (int k = 0; k < 8; ++k) s += std::sin(kTwoPi * f[k] * t + ph[k]);
        const double env = 0.55 + 0.45 * std::sin(kTwoPi * mod_hz * t + phase);
        clip.samples[i] = amp * (0.35 * env * s + line * std::sin(kTwoPi * f_line * t + phase));
      }
      break;
    }
    default: {  // high steady tone
      const double f = 1500.0 + 900.0 * unit(rng);
      for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        clip.samples[i] = amp * std::sin(kTwoPi * f * t + phase);
      }
      break;
    }
  }

  std::normal_distribution<double> g(0.0, 1.0);
  double peak = 0.0;
  for (int i = 0; i < n; ++i) {
    clip.samples[i] += noise_level * g(rng);
    peak = std::max(peak, std::abs(clip.samples[i]));
  }
  if (peak > 0.99) {  // keep inside [-1, 1] with headroom
    for (auto& s : clip.samples) s *= 0.99 / peak;
  }
  return clip;
}

}  // namespace

DatasetManifest generate_toy_corpus(const std::string& root_dir, const ToyCorpusConfig& cfg) {
  if (cfg.classes < 2 || cfg.classes > 4) throw ConfigError("toy corpus: classes must be in [2, 4]");
  if (cfg.clips_per_class < cfg.folds)
    throw ConfigError("toy corpus: need at least one clip per class per fold");
  std::filesystem::create_directories(root_dir);

  static const char* kNames[4] = {"tone_low", "chirp_up", "noise_band", "tone_high"};

  DatasetManifest m;
  for (int c = 0; c < cfg.classes; ++c) m.class_names.push_back(kNames[c]);
  std::sort(m.class_names.begin(), m.class_names.end());

  for (int c = 0; c < cfg.classes; ++c) {
    for (int i = 0; i < cfg.clips_per_class; ++i) {
      const std::string key = std::string(kNames[c]) + "#" + std::to_string(i);
      const std::uint64_t clip_seed = fnv1a64(key) ^ cfg.seed;
      AudioClip clip =
          synth_clip(c, cfg.sample_rate_hz, cfg.duration_s, cfg.noise_level, clip_seed);
      char fname[64];
      std::snprintf(fname, sizeof(fname), "%s_%03d.wav", kNames[c], i);
      save_wav_16bit((std::filesystem::path(root_dir) / fname).string(), clip);

      ManifestEntry e;
      e.path = fname;
      e.label = static_cast<int>(std::find(m.class_names.begin(), m.class_names.end(), kNames[c]) -
                                 m.class_names.begin());
      e.fold = i % cfg.folds;  // stratified round-robin
      m.entries.push_back(std::move(e));
    }
  }
  save_manifest_csv((std::filesystem::path(root_dir) / "manifest.csv").string(), m);
  return m;
}

}  // namespace sabre::audio
