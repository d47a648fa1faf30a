#include "sabre/transforms/stft.hpp"

#include <cmath>

namespace sabre::transforms {

namespace {
constexpr double kPi = 3.14159265358979323846;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }
}  // namespace

void fft_radix2(std::vector<std::complex<double>>& a) {
  const int n = static_cast<int>(a.size());
  if (!is_pow2(n)) throw ConfigError("fft_radix2: size must be a power of two");

  // Bit-reversal permutation.
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  for (int len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * kPi / len;
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (int i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (int k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> t = a[i + k + len / 2] * w;
        a[i + k] = u + t;
        a[i + k + len / 2] = u - t;
        w *= wlen;
      }
    }
  }
}

std::vector<double> hann_window(int length) {
  if (length < 1) throw ConfigError("hann_window: length must be >= 1");
  std::vector<double> w(length);
  for (int n = 0; n < length; ++n) w[n] = 0.5 * (1.0 - std::cos(2.0 * kPi * n / length));
  return w;
}

int stft_frame_count(int signal_len, const StftConfig& cfg) {
  if (signal_len < cfg.win_length)
    throw DegenerateInputError("stft: signal shorter than the analysis window");
  return (signal_len - cfg.win_length) / cfg.hop + 1;
}

CMat stft(const std::vector<double>& signal, const StftConfig& cfg) {
  return stft(signal, cfg, hann_window(cfg.win_length));
}

CMat stft(const std::vector<double>& signal, const StftConfig& cfg,
          const std::vector<double>& window) {
  validate(cfg);
  if (static_cast<int>(window.size()) != cfg.win_length)
    throw InterfaceError("stft: window length != win_length");

  const int n = static_cast<int>(signal.size());
  const int frames = stft_frame_count(n, cfg);
  const int bins = cfg.n_fft / 2 + 1;
  const int pad = (cfg.n_fft - cfg.win_length) / 2;

  CMat out(bins, frames);
  std::vector<std::complex<double>> buf(cfg.n_fft);
  for (int m = 0; m < frames; ++m) {
    std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
    const int start = m * cfg.hop;
    for (int i = 0; i < cfg.win_length; ++i) buf[pad + i] = signal[start + i] * window[i];
    fft_radix2(buf);
    for (int k = 0; k < bins; ++k) out(k, m) = buf[k];
  }
  return out;
}

Spectrogram stft_spectrogram(const std::vector<double>& signal, const StftConfig& cfg,
                             int sample_rate_hz) {
  const CMat x = stft(signal, cfg);
  Spectrogram s;
  s.values = Mat(x.rows, x.cols);
  for (std::size_t i = 0; i < x.v.size(); ++i) s.values.v[i] = std::norm(x.v[i]);
  s.kind = SpectrogramKind::Stft;
  s.time_step_s = static_cast<double>(cfg.hop) / sample_rate_hz;
  s.axis_meta.resize(x.rows);
  for (int k = 0; k < x.rows; ++k)
    s.axis_meta[k] = static_cast<double>(k) * sample_rate_hz / cfg.n_fft;
  s.config_fingerprint = cfg.fingerprint();
  return s;
}

}  // namespace sabre::transforms
