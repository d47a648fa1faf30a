#pragma once

#include <string>

#include "sabre/transforms/types.hpp"

namespace sabre::transforms {

// Binary spectrogram container: magic "SPG1", u32 LE rows, u32 LE cols,
// u8 kind code, f32 LE row-major payload, then a UTF-8 JSON trailer holding
// axis_meta, time_step_s, and the config fingerprint.
void save_spg(const std::string& path, const Spectrogram& spec);
Spectrogram load_spg(const std::string& path);

// 8-bit grayscale PNG of the min-max scaled matrix, for human inspection only.
void write_png_gray8(const std::string& path, const Mat& m);

}  // namespace sabre::transforms
