#pragma once

#include <vector>

#include "sabre/transforms/types.hpp"

namespace sabre::transforms {

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangle center frequencies in Hz (n_mels entries) for filters equally
// spaced on the mel scale between 0 and sample_rate/2.
std::vector<double> mel_center_frequencies(int n_mels, int sample_rate_hz);

// n_mels x (n_fft/2 + 1) triangular filterbank; each row is divided by its
// filter bandwidth (area normalization) so rows carry comparable energy.
Mat mel_filterbank(int n_mels, int n_fft, int sample_rate_hz);

// DCT-II basis matrix, n x n. Row k, column i holds
//   c_k * cos(pi (2i + 1) k / (2n)),
// with orthonormal scaling c_0 = sqrt(1/n), c_k = sqrt(2/n) when ortho;
// otherwise the plain convention c_k = 2.
Mat dct2_matrix(int n, bool ortho);

// Row n is multiplied by (1 + sin(pi (n+1) / cf)) * cf / 2; cf = 0 leaves the
// matrix untouched (liftering disabled).
Mat lifter(const Mat& m, double cf);

// Power STFT -> mel filterbank -> log(x + 1e-10) -> DCT-II along coefficients
// -> first n_mfcc rows -> optional liftering. kind = MFCC, axis_meta holds the
// coefficient index per row.
Spectrogram mfcc(const std::vector<double>& signal, const MfccConfig& cfg);

}  // namespace sabre::transforms
