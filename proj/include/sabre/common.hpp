#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sabre/errors.hpp"

namespace sabre {

// Dense row-major matrix of doubles. Deliberately minimal: the DSP code
// only needs storage, indexing and a handful of reductions.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), v(static_cast<size_t>(r) * c, fill) {}

  double& operator()(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }

  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
};

double mat_max(const Mat& m);
double mat_min(const Mat& m);
bool mat_all_finite(const Mat& m);
// max |a-b| / max(max|a|,|b|, floor)
double rel_frobenius_err(const Mat& a, const Mat& b);

// FNV-1a 64-bit, used for config fingerprints and checkpoint hashes.
std::uint64_t fnv1a64(const void* data, size_t n, std::uint64_t seed = 1469598103934665603ULL);
std::uint64_t fnv1a64(const std::string& s);
std::string hex64(std::uint64_t h);

// Runs fn(i) for i in [0, n). With workers <= 1 runs inline; otherwise
// splits into contiguous chunks. Caller guarantees fn(i) are independent.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

// Seeded RNG producing identical streams on every platform (the standard
// distributions are implementation-defined, so the mapping from raw bits to
// doubles is done by hand).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

  std::uint64_t next_u64();
  double uniform();                      // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  int uniform_int(int n);                // [0, n)
  double gaussian();                     // standard normal (Box-Muller)

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace sabre
