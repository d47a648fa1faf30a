#include "sabre/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <thread>

namespace sabre {

double mat_max(const Mat& m) {
  double best = -HUGE_VAL;
  for (double x : m.v) best = std::max(best, x);
  return best;
}

double mat_min(const Mat& m) {
  double best = HUGE_VAL;
  for (double x : m.v) best = std::min(best, x);
  return best;
}

bool mat_all_finite(const Mat& m) {
  for (double x : m.v)
    if (!std::isfinite(x)) return false;
  return true;
}

double rel_frobenius_err(const Mat& a, const Mat& b) {
  if (!a.same_shape(b)) throw InterfaceError("rel_frobenius_err: shape mismatch");
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < a.v.size(); ++i) {
    num += (a.v[i] - b.v[i]) * (a.v[i] - b.v[i]);
    den += std::max(a.v[i] * a.v[i], b.v[i] * b.v[i]);
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

std::uint64_t fnv1a64(const void* data, size_t n, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

std::uint64_t Rng::next_u64() {
  // splitmix64
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int Rng::uniform_int(int n) {
  if (n <= 0) throw ConfigError("Rng::uniform_int: n must be positive");
  return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
}

double Rng::gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = uniform(-1.0, 1.0);
    v = uniform(-1.0, 1.0);
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  have_spare_ = true;
  return u * f;
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  if (workers <= 1 || n == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int nthreads = std::min(workers, n);
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (int t = 0; t < nthreads; ++t) {
    pool.emplace_back([=, &fn] {
      for (int i = t; i < n; i += nthreads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace sabre
