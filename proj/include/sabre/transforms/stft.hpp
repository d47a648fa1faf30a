#pragma once

#include <complex>
#include <vector>

#include "sabre/transforms/types.hpp"

namespace sabre::transforms {

// Complex matrix, row-major, used only for raw STFT output.
struct CMat {
  int rows = 0;
  int cols = 0;
  std::vector<std::complex<double>> v;

  CMat() = default;
  CMat(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c) {}

  std::complex<double>& operator()(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
  const std::complex<double>& operator()(int r, int c) const {
    return v[static_cast<std::size_t>(r) * cols + c];
  }
};

// In-place iterative radix-2 FFT; size must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& a);

// Periodic Hann window of the given length: w[n] = 0.5 (1 - cos(2 pi n / len)).
std::vector<double> hann_window(int length);

int stft_frame_count(int signal_len, const StftConfig& cfg);

// One-sided STFT. Each frame of win_length samples starting at m*hop is
// multiplied by the window, zero-padded centrally to n_fft, and transformed.
// Rows = n_fft/2 + 1, phase is frame-local. The window override exists so
// callers (and tests) can substitute e.g. a rectangular window; it must have
// win_length entries.
CMat stft(const std::vector<double>& signal, const StftConfig& cfg);
CMat stft(const std::vector<double>& signal, const StftConfig& cfg,
          const std::vector<double>& window);

// Squared magnitudes of stft(); kind = STFT, axis_meta = bin center freqs (Hz).
Spectrogram stft_spectrogram(const std::vector<double>& signal, const StftConfig& cfg,
                             int sample_rate_hz);

}  // namespace sabre::transforms
