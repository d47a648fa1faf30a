#include "sabre/transforms/types.hpp"

#include <cmath>
#include <sstream>

namespace sabre::transforms {

std::string kind_name(SpectrogramKind k) {
  switch (k) {
    case SpectrogramKind::Stft: return "STFT";
    case SpectrogramKind::Mfcc: return "MFCC";
    case SpectrogramKind::Dwt: return "DWT";
    case SpectrogramKind::Pixels: return "PIXELS";
  }
  return "?";
}

std::string mother_name(MotherWavelet m) {
  switch (m) {
    case MotherWavelet::Haar: return "haar";
    case MotherWavelet::MexicanHat: return "mexican_hat";
    case MotherWavelet::ComplexMorlet: return "complex_morlet";
  }
  return "?";
}

void validate(const Spectrogram& s) {
  if (!mat_all_finite(s.values)) throw FormatError("Spectrogram: non-finite entries");
  if (s.kind == SpectrogramKind::Stft || s.kind == SpectrogramKind::Dwt) {
    if (mat_min(s.values) < 0.0)
      throw FormatError("Spectrogram: negative values in a " + kind_name(s.kind) + " matrix");
  }
  if (static_cast<int>(s.axis_meta.size()) != s.values.rows)
    throw InterfaceError("Spectrogram: axis_meta size != row count");
}

namespace {

bool one_of(int v, std::initializer_list<int> set) {
  for (int s : set)
    if (v == s) return true;
  return false;
}

std::uint64_t fingerprint_str(const std::string& s) { return fnv1a64(s); }

}  // namespace

std::uint64_t StftConfig::fingerprint() const {
  std::ostringstream os;
  os << "stft:" << n_fft << ":" << win_length << ":" << hop << ":hann";
  return fingerprint_str(os.str());
}

void validate(const StftConfig& cfg) {
  if (!one_of(cfg.n_fft, {512, 1024, 2048}))
    throw ConfigError("StftConfig: n_fft must be one of 512, 1024, 2048");
  if (cfg.win_length <= 0 || cfg.win_length > cfg.n_fft)
    throw ConfigError("StftConfig: win_length must be in (0, n_fft]");
  if (cfg.hop < 1) throw ConfigError("StftConfig: hop must be >= 1");
}

std::uint64_t MfccConfig::fingerprint() const {
  std::ostringstream os;
  os << "mfcc:" << sample_rate_hz << ":" << n_mfcc << ":" << hop << ":" << n_mels << ":" << n_fft
     << ":" << (ortho_dct ? 1 : 0) << ":" << lifter_cf;
  return fingerprint_str(os.str());
}

void validate(const MfccConfig& cfg) {
  if (!one_of(cfg.sample_rate_hz, {8000, 16000, 22050, 24000}))
    throw ConfigError("MfccConfig: sample_rate_hz must be one of 8000, 16000, 22050, 24000");
  if (!one_of(cfg.n_mfcc, {13, 20, 40}))
    throw ConfigError("MfccConfig: n_mfcc must be one of 13, 20, 40");
  if (cfg.n_mels < 1) throw ConfigError("MfccConfig: n_mels must be >= 1");
  if (cfg.n_mfcc > cfg.n_mels) throw ConfigError("MfccConfig: n_mfcc must be <= n_mels");
  if (cfg.hop < 1) throw ConfigError("MfccConfig: hop must be >= 1");
  if (!one_of(cfg.n_fft, {512, 1024, 2048}))
    throw ConfigError("MfccConfig: n_fft must be one of 512, 1024, 2048");
  if (cfg.lifter_cf < 0.0) throw ConfigError("MfccConfig: lifter_cf must be >= 0");
}

int DwtConfig::frame_len_samples() const {
  return static_cast<int>(std::lround(frame_len_s * sample_rate_hz));
}

int DwtConfig::hop_samples() const {
  const int len = frame_len_samples();
  const int hop = static_cast<int>(std::lround(len * (1.0 - overlap_fraction)));
  return std::max(1, hop);
}

std::uint64_t DwtConfig::fingerprint() const {
  std::ostringstream os;
  os << "dwt:" << mother_name(mother) << ":" << sample_rate_hz << ":" << frame_len_s << ":"
     << overlap_fraction << ":" << n_scales << ":" << (log_magnitude ? 1 : 0);
  return fingerprint_str(os.str());
}

void validate(const DwtConfig& cfg) {
  if (!one_of(cfg.sample_rate_hz, {8000, 16000}))
    throw ConfigError("DwtConfig: sample_rate_hz must be 8000 or 16000");
  if (cfg.overlap_fraction < 0.0 || cfg.overlap_fraction >= 1.0)
    throw ConfigError("DwtConfig: overlap_fraction must be in [0, 1)");
  if (cfg.n_scales < 2) throw ConfigError("DwtConfig: n_scales must be >= 2");
  if (cfg.frame_len_s <= 0.0) throw ConfigError("DwtConfig: frame_len_s must be positive");
}

void validate(const ModelInput& m) {
  if (static_cast<int>(m.pixels.size()) != kInputPixels)
    throw InterfaceError("ModelInput: expected exactly 128x128 pixels");
  for (double p : m.pixels) {
    if (!std::isfinite(p)) throw FormatError("ModelInput: non-finite pixel");
    if (p < 0.0 || p > kMaxIntensity) throw FormatError("ModelInput: pixel outside [0, 255]");
  }
}

}  // namespace sabre::transforms
