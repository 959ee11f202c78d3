#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace evacsim {

// 64-bit avalanche finalizer (splitmix64). Used for all seed derivation so
// that stream assignment is a pure function of (master seed, run, name).
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_u64(std::uint64_t h, std::uint64_t v) {
  return mix64(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

constexpr std::uint64_t hash_str(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seed for run `run_index` under a master seed.
constexpr std::uint64_t derive_run_seed(std::uint64_t master_seed, std::uint64_t run_index) {
  return hash_u64(mix64(master_seed), run_index);
}

/// Seed for a named stream ("field", "delay", "error", "placement") of a run.
constexpr std::uint64_t derive_stream_seed(std::uint64_t run_seed, std::string_view name) {
  return hash_u64(run_seed, hash_str(name));
}

/// Deterministic uniform generator. mt19937_64 output is pinned by the
/// standard; the [0,1) mapping below avoids the unspecified behavior of
/// std::uniform_real_distribution.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Consumes exactly one draw regardless of p.
  bool bernoulli(double p) { return uniform01() < p; }

  /// Uniform in [0, n). Consumes exactly one draw.
  int uniform_int(int n) {
    int k = static_cast<int>(uniform01() * static_cast<double>(n));
    return k >= n ? n - 1 : k;
  }

 private:
  std::mt19937_64 gen_;
};

/// Standard normal quantile (Acklam's rational approximation, |eps| < 1.2e-9).
inline double normal_quantile(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p <= 0.0) return -1e9;
  if (p >= 1.0) return 1e9;
  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p <= 1.0 - p_low) {
    double q = p - 0.5;
    double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  double q = std::sqrt(-2.0 * std::log(1.0 - p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

/// Standard normal CDF.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z * 0x1.6a09e667f3bcdp-1); }

}  // namespace evacsim
