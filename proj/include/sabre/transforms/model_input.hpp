#pragma once

#include "sabre/transforms/types.hpp"

namespace sabre::transforms {

// Bilinear resize with align-corners index mapping:
//   in_pos = out_idx * (in_size - 1) / (out_size - 1).
// Requires at least 2 rows/cols in and out.
Mat bilinear_resize(const Mat& in, int out_rows, int out_cols);

// Affine min-max rescale of the whole matrix onto [0, 255]; a constant matrix
// maps to all zeros.
Mat rescale_to_intensity(const Mat& in);

// bilinear_resize to 128x128 followed by rescale_to_intensity.
ModelInput to_model_input(const Spectrogram& spec);

}  // namespace sabre::transforms
