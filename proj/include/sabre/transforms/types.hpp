#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sabre/common.hpp"

namespace sabre::transforms {

enum class SpectrogramKind : std::uint8_t { Stft = 0, Mfcc = 1, Dwt = 2, Pixels = 3 };

std::string kind_name(SpectrogramKind k);

// 2D time-frequency representation. Rows are frequency bins, mel
// coefficients or wavelet scales; columns are time frames.
struct Spectrogram {
  Mat values;
  SpectrogramKind kind = SpectrogramKind::Stft;
  double time_step_s = 0.0;          // seconds per column
  std::vector<double> axis_meta;     // per-row: center Hz, coefficient index, or center Hz of scale
  std::uint64_t config_fingerprint = 0;
};

// Throws if the spectrogram violates its kind's invariants (NaN/Inf, or
// negative values for the squared-magnitude / magnitude kinds).
void validate(const Spectrogram& s);

enum class WindowKind { Hann };

struct StftConfig {
  int n_fft = 2048;        // one of 512, 1024, 2048
  int win_length = 2048;   // <= n_fft
  int hop = 512;
  WindowKind window = WindowKind::Hann;

  std::uint64_t fingerprint() const;
};
void validate(const StftConfig& cfg);

struct MfccConfig {
  int sample_rate_hz = 22050;  // one of 8000, 16000, 22050, 24000
  int n_mfcc = 20;             // one of 13, 20, 40
  int hop = 1024;
  int n_mels = 128;
  int n_fft = 2048;
  bool ortho_dct = true;
  double lifter_cf = 0.0;      // 0 disables liftering

  std::uint64_t fingerprint() const;
};
void validate(const MfccConfig& cfg);

enum class MotherWavelet { Haar, MexicanHat, ComplexMorlet };

std::string mother_name(MotherWavelet m);

struct DwtConfig {
  MotherWavelet mother = MotherWavelet::ComplexMorlet;
  int sample_rate_hz = 8000;    // 8000 or 16000
  double frame_len_s = 0.050;
  double overlap_fraction = 0.5;
  int n_scales = 64;            // log-spaced
  bool log_magnitude = true;

  int frame_len_samples() const;
  int hop_samples() const;
  std::uint64_t fingerprint() const;
};
void validate(const DwtConfig& cfg);

// Pixel intensity ceiling for model inputs and attacks.
constexpr double kMaxIntensity = 255.0;
constexpr int kInputSide = 128;
constexpr int kInputPixels = kInputSide * kInputSide;

// 128x128 intensity image in [0, 255], the unit every attack perturbs.
struct ModelInput {
  std::vector<double> pixels;  // row-major, kInputPixels entries
  std::uint64_t source_fingerprint = 0;

  ModelInput() : pixels(kInputPixels, 0.0) {}
  double& at(int r, int c) { return pixels[static_cast<size_t>(r) * kInputSide + c]; }
  double at(int r, int c) const { return pixels[static_cast<size_t>(r) * kInputSide + c]; }
};

void validate(const ModelInput& m);

}  // namespace sabre::transforms
