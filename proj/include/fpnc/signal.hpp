#pragma once

// Complex-sample primitives shared by every block of the simulator: radix-2
// DFT/IDFT, linear and circular convolution, AWGN and the per-trial random
// source.

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fpnc {

using Complex = std::complex<double>;
using Samples = std::vector<Complex>;

/// Raised for invalid sizes, parameters and configurations.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Baseband samples plus the index of samples[0] on the relay's receive
/// timeline. Only the channel model produces negative origins.
struct TimeSignal {
  Samples samples;
  long origin_index = 0;

  TimeSignal() = default;
  explicit TimeSignal(Samples s, long origin = 0) : samples(std::move(s)), origin_index(origin) {}

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  Complex& operator[](std::size_t i) { return samples[i]; }
  const Complex& operator[](std::size_t i) const { return samples[i]; }
};

/// N bins of a forward transform, k = 0..N-1 in FFT order.
struct Spectrum {
  Samples bins;

  Spectrum() = default;
  explicit Spectrum(Samples b) : bins(std::move(b)) {}

  std::size_t size() const { return bins.size(); }
  Complex& operator[](std::size_t k) { return bins[k]; }
  const Complex& operator[](std::size_t k) const { return bins[k]; }
};

// ---------------------------------------------------------------------------
// Random source
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seeded generator. Streams are derived by hashing (seed, key...) so that a
/// trial's stream depends only on its coordinates, never on execution order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

  /// Independent child stream keyed by the given coordinates.
  template <class... Keys>
  Rng derive(Keys... keys) const {
    std::uint64_t s = splitmix64(seed_);
    ((s = splitmix64(s ^ static_cast<std::uint64_t>(keys))), ...);
    return Rng(s);
  }

  std::uint64_t seed() const { return seed_; }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double gaussian() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  std::uint8_t bit() { return static_cast<std::uint8_t>(engine_() >> 63); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_); }

  /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
  Complex complex_gaussian(double variance) {
    const double s = std::sqrt(variance / 2.0);
    const double re = gaussian();
    const double im = gaussian();
    return {s * re, s * im};
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Transforms
// ---------------------------------------------------------------------------

namespace detail {

inline void fft_in_place(Samples& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        // Twiddles computed directly rather than by recurrence to keep the
        // roundoff at a few ulp for N up to several thousand.
        const Complex w = std::polar(1.0, ang * static_cast<double>(k));
        const Complex u = a[i + k];
        const Complex v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
}

inline void require_pow2(std::size_t n, const char* what) {
  if (n == 0 || !std::has_single_bit(n))
    throw ConfigError(std::string(what) + ": length " + std::to_string(n) + " is not a power of two");
}

}  // namespace detail

/// Unnormalized forward DFT: X[k] = sum_n x[n] e^{-j 2 pi n k / N}.
inline Spectrum dft(std::span<const Complex> x) {
  detail::require_pow2(x.size(), "dft");
  Samples a(x.begin(), x.end());
  detail::fft_in_place(a, false);
  return Spectrum(std::move(a));
}

inline Spectrum dft(const TimeSignal& x, std::size_t n) {
  if (x.size() != n)
    throw ConfigError("dft: expected " + std::to_string(n) + " samples, got " + std::to_string(x.size()));
  return dft(x.samples);
}

/// Inverse DFT scaled by 1/N.
inline TimeSignal idft(const Spectrum& X) {
  detail::require_pow2(X.size(), "idft");
  Samples a = X.bins;
  detail::fft_in_place(a, true);
  const double scale = 1.0 / static_cast<double>(a.size());
  for (auto& v : a) v *= scale;
  return TimeSignal(std::move(a));
}

// ---------------------------------------------------------------------------
// Convolution
// ---------------------------------------------------------------------------

/// y[n] = sum_k h[k] x[(n-k) mod N].
inline TimeSignal circular_convolve(const TimeSignal& x, const TimeSignal& h) {
  if (x.size() != h.size())
    throw ConfigError("circular_convolve: length mismatch " + std::to_string(x.size()) + " vs " +
                      std::to_string(h.size()));
  const std::size_t n = x.size();
  Samples y(n);
  for (std::size_t i = 0; i < n; ++i) {
    Complex acc{};
    for (std::size_t k = 0; k < n; ++k) acc += h[k] * x[(i + n - k) % n];
    y[i] = acc;
  }
  return TimeSignal(std::move(y), x.origin_index);
}

/// Full linear convolution, length len(x)+len(h)-1. The output keeps x's origin.
inline TimeSignal linear_convolve(const TimeSignal& x, const TimeSignal& h) {
  if (h.empty()) throw ConfigError("linear_convolve: empty impulse response");
  if (x.empty()) return TimeSignal({}, x.origin_index);
  Samples y(x.size() + h.size() - 1);
  for (std::size_t k = 0; k < h.size(); ++k) {
    const Complex hk = h[k];
    if (hk == Complex{}) continue;
    for (std::size_t n = 0; n < x.size(); ++n) y[n + k] += hk * x[n];
  }
  return TimeSignal(std::move(y), x.origin_index);
}

// ---------------------------------------------------------------------------
// Noise
// ---------------------------------------------------------------------------

/// Adds complex AWGN with E|w|^2 = noise_variance per sample.
inline TimeSignal add_awgn(TimeSignal x, double noise_variance, Rng& rng) {
  if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance))
    throw ConfigError("add_awgn: noise variance must be finite and >= 0");
  if (noise_variance == 0.0) return x;
  for (auto& s : x.samples) s += rng.complex_gaussian(noise_variance);
  return x;
}

inline double mean_power(std::span<const Complex> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& v : x) acc += std::norm(v);
  return acc / static_cast<double>(x.size());
}

}  // namespace fpnc
