#include "sabre/transforms/model_input.hpp"

#include <algorithm>
#include <cmath>

namespace sabre::transforms {

Mat bilinear_resize(const Mat& in, int out_rows, int out_cols) {
  if (in.rows < 2 || in.cols < 2)
    throw DegenerateInputError("bilinear_resize: input needs at least 2 rows and 2 columns");
  if (out_rows < 2 || out_cols < 2)
    throw ConfigError("bilinear_resize: output needs at least 2 rows and 2 columns");

  Mat out(out_rows, out_cols);
  const double rscale = static_cast<double>(in.rows - 1) / (out_rows - 1);
  const double cscale = static_cast<double>(in.cols - 1) / (out_cols - 1);
  for (int r = 0; r < out_rows; ++r) {
    const double rf = r * rscale;
    const int r0 = std::min(static_cast<int>(rf), in.rows - 2);
    const double dr = rf - r0;
    for (int c = 0; c < out_cols; ++c) {
      const double cf = c * cscale;
      const int c0 = std::min(static_cast<int>(cf), in.cols - 2);
      const double dc = cf - c0;
      out(r, c) = (1.0 - dr) * (1.0 - dc) * in(r0, c0) + (1.0 - dr) * dc * in(r0, c0 + 1) +
                  dr * (1.0 - dc) * in(r0 + 1, c0) + dr * dc * in(r0 + 1, c0 + 1);
    }
  }
  return out;
}

Mat rescale_to_intensity(const Mat& in) {
  const double lo = mat_min(in);
  const double hi = mat_max(in);
  Mat out(in.rows, in.cols);
  if (hi <= lo) return out;  // constant input -> all zeros
  const double scale = kMaxIntensity / (hi - lo);
  for (std::size_t i = 0; i < in.v.size(); ++i) out.v[i] = (in.v[i] - lo) * scale;
  return out;
}

ModelInput to_model_input(const Spectrogram& spec) {
  validate(spec);
  const Mat resized = bilinear_resize(spec.values, kInputSide, kInputSide);
  const Mat scaled = rescale_to_intensity(resized);
  ModelInput mi;
  mi.pixels = scaled.v;
  mi.source_fingerprint = spec.config_fingerprint;
  return mi;
}

}  // namespace sabre::transforms
