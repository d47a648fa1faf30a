#include "sabre/transforms/wavelet.hpp"

#include <cmath>

namespace sabre::transforms {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kMorletOmega = 6.0;
// Truncation half-width in dilated units; the Gaussian envelope tail beyond
// |u| = 6 holds far less than 1e-6 of the kernel mass.
constexpr double kSupportU = 6.0;
}  // namespace

double wavelet_center_omega(MotherWavelet mother) {
  switch (mother) {
    case MotherWavelet::ComplexMorlet:
      return kMorletOmega;
    case MotherWavelet::MexicanHat:
      // argmax of |psi_hat(w)| = w^2 exp(-w^2/2)
      return std::sqrt(2.0);
    case MotherWavelet::Haar:
      // numeric argmax of |sin^2(w/4)/(w/4)|
      return 4.6622447;
  }
  throw ConfigError("wavelet_center_omega: unknown mother");
}

WaveletKernel wavelet_kernel(MotherWavelet mother, double scale_s, int sample_rate_hz) {
  if (scale_s <= 0.0) throw ConfigError("wavelet_kernel: scale must be positive");
  const double amp = 1.0 / std::sqrt(scale_s);
  const double samples_per_u = scale_s * sample_rate_hz;

  WaveletKernel ker;
  if (mother == MotherWavelet::Haar) {
    // Support [0, 1): +1 on the first half, -1 on the second. An even sample
    // count keeps the discrete sum exactly zero.
    const int half = std::max(1, static_cast<int>(std::lround(samples_per_u / 2.0)));
    ker.k_min = 0;
    ker.samples.resize(static_cast<std::size_t>(2 * half));
    for (int i = 0; i < half; ++i) ker.samples[i] = amp;
    for (int i = half; i < 2 * half; ++i) ker.samples[i] = -amp;
    return ker;
  }

  const int half_width = std::max(1, static_cast<int>(std::ceil(kSupportU * samples_per_u)));
  ker.k_min = -half_width;
  ker.samples.resize(static_cast<std::size_t>(2 * half_width + 1));
  for (int k = -half_width; k <= half_width; ++k) {
    const double u = static_cast<double>(k) / samples_per_u;
    const double env = std::exp(-0.5 * u * u);
    std::complex<double> psi;
    if (mother == MotherWavelet::ComplexMorlet) {
      psi = (1.0 / std::sqrt(2.0 * kPi)) * env *
            std::complex<double>(std::cos(kMorletOmega * u), -std::sin(kMorletOmega * u));
    } else {  // MexicanHat
      psi = (2.0 / (std::sqrt(3.0) * std::pow(kPi, 0.25))) * (1.0 - u * u) * env;
    }
    ker.samples[static_cast<std::size_t>(k + half_width)] = amp * psi;
  }
  return ker;
}

std::vector<double> wavelet_scale_grid(const DwtConfig& cfg) {
  validate(cfg);
  const double omega = wavelet_center_omega(cfg.mother);
  const double f_min = static_cast<double>(cfg.sample_rate_hz) / cfg.frame_len_samples();
  const double f_max = 0.45 * cfg.sample_rate_hz;

  // Log-spaced center frequencies, descending, so scales come out ascending.
  std::vector<double> scales(cfg.n_scales);
  const double log_lo = std::log(f_min), log_hi = std::log(f_max);
  for (int i = 0; i < cfg.n_scales; ++i) {
    const double f = std::exp(log_hi + (log_lo - log_hi) * i / (cfg.n_scales - 1));
    scales[i] = omega / (2.0 * kPi * f);
  }
  return scales;
}

Spectrogram cwt_spectrogram(const std::vector<double>& signal, const DwtConfig& cfg) {
  validate(cfg);
  const int n = static_cast<int>(signal.size());
  const int frame_len = cfg.frame_len_samples();
  const int hop = cfg.hop_samples();
  if (n < frame_len)
    throw DegenerateInputError("cwt_spectrogram: clip shorter than one analysis frame");
  const int frames = (n - frame_len) / hop + 1;

  const std::vector<double> scales = wavelet_scale_grid(cfg);

  Mat vals(cfg.n_scales, frames);
  for (int si = 0; si < cfg.n_scales; ++si) {
    const WaveletKernel ker = wavelet_kernel(cfg.mother, scales[si], cfg.sample_rate_hz);
    const int klen = static_cast<int>(ker.samples.size());
    for (int m = 0; m < frames; ++m) {
      const int center = m * hop + frame_len / 2;
      std::complex<double> acc(0.0, 0.0);
      for (int i = 0; i < klen; ++i) {
        const int idx = center + ker.k_min + i;
        if (idx < 0 || idx >= n) continue;
        acc += signal[idx] * std::conj(ker.samples[i]);
      }
      double mag = std::abs(acc);
      if (cfg.log_magnitude) mag = std::log1p(mag);
      vals(si, m) = mag;
    }
  }

  Spectrogram s;
  s.values = std::move(vals);
  s.kind = SpectrogramKind::Dwt;
  s.time_step_s = static_cast<double>(hop) / cfg.sample_rate_hz;
  s.axis_meta = scales;
  s.config_fingerprint = cfg.fingerprint();
  return s;
}

}  // namespace sabre::transforms
