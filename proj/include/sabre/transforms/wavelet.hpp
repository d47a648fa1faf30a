#pragma once

#include <complex>
#include <vector>

#include "sabre/transforms/types.hpp"

namespace sabre::transforms {

// Sampled, dilated mother wavelet. samples[i] sits at integer offset
// k_min + i from the analysis point; values already include the 1/sqrt(s)
// scaling. Scale s is in seconds; the mother is evaluated at u = k/(s*sr).
struct WaveletKernel {
  int k_min = 0;
  std::vector<std::complex<double>> samples;
};

// Angular center frequency of the mother at scale 1 (rad/s): used to map a
// scale to its center frequency f = omega_c / (2 pi s).
double wavelet_center_omega(MotherWavelet mother);

WaveletKernel wavelet_kernel(MotherWavelet mother, double scale_s, int sample_rate_hz);

// n_scales scale values (seconds, ascending) log-spaced so the corresponding
// center frequencies span [sr / frame_len_samples, 0.45 * sr].
std::vector<double> wavelet_scale_grid(const DwtConfig& cfg);

// Framewise scalogram: one coefficient per (scale, frame), the magnitude of
// the wavelet correlation evaluated at the frame center (signal zero-padded at
// the edges). Rows = scales ascending, columns = frames; log_magnitude applies
// log(1 + x).
Spectrogram cwt_spectrogram(const std::vector<double>& signal, const DwtConfig& cfg);

}  // namespace sabre::transforms
