#include "sabre/transforms/mfcc.hpp"

#include <algorithm>
#include <cmath>

#include "sabre/transforms/stft.hpp"

namespace sabre::transforms {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kLogFloor = 1e-10;
}  // namespace

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> mel_center_frequencies(int n_mels, int sample_rate_hz) {
  if (n_mels < 1) throw ConfigError("mel_center_frequencies: n_mels must be >= 1");
  const double mel_max = hz_to_mel(sample_rate_hz / 2.0);
  std::vector<double> centers(n_mels);
  for (int i = 0; i < n_mels; ++i)
    centers[i] = mel_to_hz(mel_max * (i + 1) / (n_mels + 1));
  return centers;
}

Mat mel_filterbank(int n_mels, int n_fft, int sample_rate_hz) {
  if (n_mels < 1) throw ConfigError("mel_filterbank: n_mels must be >= 1");
  const int bins = n_fft / 2 + 1;
  const double mel_max = hz_to_mel(sample_rate_hz / 2.0);

  // n_mels + 2 edge frequencies, equally spaced in mel.
  std::vector<double> edges(n_mels + 2);
  for (int i = 0; i < n_mels + 2; ++i) edges[i] = mel_to_hz(mel_max * i / (n_mels + 1));

  Mat fb(n_mels, bins);
  for (int i = 0; i < n_mels; ++i) {
    const double lo = edges[i], mid = edges[i + 1], hi = edges[i + 2];
    const double norm = 2.0 / (hi - lo);
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate_hz / n_fft;
      const double up = (f - lo) / (mid - lo);
      const double down = (hi - f) / (hi - mid);
      fb(i, k) = norm * std::max(0.0, std::min(up, down));
    }
  }
  return fb;
}

Mat dct2_matrix(int n, bool ortho) {
  if (n < 1) throw ConfigError("dct2_matrix: n must be >= 1");
  Mat d(n, n);
  for (int k = 0; k < n; ++k) {
    const double c = ortho ? std::sqrt((k == 0 ? 1.0 : 2.0) / n) : 2.0;
    for (int i = 0; i < n; ++i) d(k, i) = c * std::cos(kPi * (2 * i + 1) * k / (2.0 * n));
  }
  return d;
}

Mat lifter(const Mat& m, double cf) {
  if (cf < 0.0) throw ConfigError("lifter: cf must be >= 0");
  if (cf == 0.0) return m;
  Mat out = m;
  for (int n = 0; n < m.rows; ++n) {
    const double mult = (1.0 + std::sin(kPi * (n + 1) / cf)) * cf / 2.0;
    for (int c = 0; c < m.cols; ++c) out(n, c) *= mult;
  }
  return out;
}

Spectrogram mfcc(const std::vector<double>& signal, const MfccConfig& cfg) {
  validate(cfg);

  StftConfig scfg;
  scfg.n_fft = cfg.n_fft;
  scfg.win_length = cfg.n_fft;
  scfg.hop = cfg.hop;
  const Spectrogram power = stft_spectrogram(signal, scfg, cfg.sample_rate_hz);

  const Mat fb = mel_filterbank(cfg.n_mels, cfg.n_fft, cfg.sample_rate_hz);
  const int frames = power.values.cols;

  // log(mel @ power + floor)
  Mat logmel(cfg.n_mels, frames);
  for (int i = 0; i < cfg.n_mels; ++i) {
    for (int m = 0; m < frames; ++m) {
      double acc = 0.0;
      for (int k = 0; k < power.values.rows; ++k) acc += fb(i, k) * power.values(k, m);
      logmel(i, m) = std::log(acc + kLogFloor);
    }
  }

  // First n_mfcc rows of the DCT along the coefficient axis.
  const Mat dct = dct2_matrix(cfg.n_mels, cfg.ortho_dct);
  Mat coeffs(cfg.n_mfcc, frames);
  for (int k = 0; k < cfg.n_mfcc; ++k) {
    for (int m = 0; m < frames; ++m) {
      double acc = 0.0;
      for (int i = 0; i < cfg.n_mels; ++i) acc += dct(k, i) * logmel(i, m);
      coeffs(k, m) = acc;
    }
  }
  coeffs = lifter(coeffs, cfg.lifter_cf);

  Spectrogram s;
  s.values = std::move(coeffs);
  s.kind = SpectrogramKind::Mfcc;
  s.time_step_s = static_cast<double>(cfg.hop) / cfg.sample_rate_hz;
  s.axis_meta.resize(cfg.n_mfcc);
  for (int k = 0; k < cfg.n_mfcc; ++k) s.axis_meta[k] = k;
  s.config_fingerprint = cfg.fingerprint();
  return s;
}

}  // namespace sabre::transforms
