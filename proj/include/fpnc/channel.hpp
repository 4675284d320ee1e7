#pragma once

// Uplink/downlink impairments: per-node multipath taps with B's arrival lag
// folded into its first index, per-node CFO rotation and AWGN.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fpnc/signal.hpp"

namespace fpnc {

struct ChannelTaps {
  Samples taps{Complex(1.0, 0.0)};
  std::size_t first_index = 0;

  ChannelTaps() = default;
  ChannelTaps(Samples t, std::size_t first = 0) : taps(std::move(t)), first_index(first) {}

  static ChannelTaps flat(Complex gain = 1.0, std::size_t delay = 0) { return ChannelTaps({gain}, delay); }

  /// D: index of the last nonzero tap + 1.
  std::size_t length() const { return first_index + taps.size(); }

  void validate() const {
    if (taps.empty()) throw ConfigError("ChannelTaps: no taps");
    if (taps.back() == Complex{}) throw ConfigError("ChannelTaps: last tap must be nonzero");
    for (const auto& t : taps)
      if (!std::isfinite(t.real()) || !std::isfinite(t.imag())) throw ConfigError("ChannelTaps: non-finite tap");
  }

  ChannelTaps delayed(std::size_t by) const { return ChannelTaps(taps, first_index + by); }

  ChannelTaps rotated(double phase) const {
    ChannelTaps out = *this;
    for (auto& t : out.taps) t *= std::polar(1.0, phase);
    return out;
  }

  /// Dense impulse response h[0..D-1].
  TimeSignal impulse() const {
    Samples h(length());
    std::copy(taps.begin(), taps.end(), h.begin() + static_cast<long>(first_index));
    return TimeSignal(std::move(h));
  }

  /// Impulse response zero-padded to n samples.
  TimeSignal padded(std::size_t n) const {
    if (length() > n) throw ConfigError("ChannelTaps: response longer than " + std::to_string(n));
    TimeSignal h = impulse();
    h.samples.resize(n);
    return h;
  }
};

struct CfoSpec {
  double phi = 0.0;
};

/// Largest |phi| accepted by shipped configurations.
inline double cfo_cap(std::size_t n_fft = 64) { return 2.0 * std::numbers::pi * 0.2 / static_cast<double>(n_fft); }

struct UplinkScenario {
  ChannelTaps taps_A;
  ChannelTaps taps_B;
  std::size_t offset_B = 0;
  CfoSpec cfo_A;
  CfoSpec cfo_B;
  double noise_variance = 0.0;

  ChannelTaps effective_taps_B() const { return taps_B.delayed(offset_B); }
};

inline std::size_t delay_spread(const ChannelTaps& a, const ChannelTaps& b) { return std::max(a.length(), b.length()); }

inline std::size_t delay_spread(const UplinkScenario& s) { return delay_spread(s.taps_A, s.effective_taps_B()); }

inline TimeSignal apply_channel(const TimeSignal& x, const ChannelTaps& taps) {
  return linear_convolve(x, taps.impulse());
}

/// Sample at absolute receive index n is multiplied by e^{j n phi}.
inline TimeSignal apply_cfo(TimeSignal x, CfoSpec cfo) {
  if (cfo.phi == 0.0) return x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double n = static_cast<double>(x.origin_index + static_cast<long>(i));
    x[i] *= std::polar(1.0, n * cfo.phi);
  }
  return x;
}

/// Adds b into a on the shared receive timeline, extending a as needed.
inline void accumulate(TimeSignal& a, const TimeSignal& b) {
  if (b.empty()) return;
  if (a.empty()) {
    a = b;
    return;
  }
  const long lo = std::min(a.origin_index, b.origin_index);
  const long hi = std::max(a.origin_index + static_cast<long>(a.size()), b.origin_index + static_cast<long>(b.size()));
  if (lo != a.origin_index || hi != a.origin_index + static_cast<long>(a.size())) {
    Samples grown(static_cast<std::size_t>(hi - lo));
    std::copy(a.samples.begin(), a.samples.end(), grown.begin() + (a.origin_index - lo));
    a.samples = std::move(grown);
    a.origin_index = lo;
  }
  const long at = b.origin_index - a.origin_index;
  for (std::size_t i = 0; i < b.size(); ++i) a[static_cast<std::size_t>(at) + i] += b[i];
}

/// Zero-extends a signal placed at a positive origin so it starts at index 0.
inline TimeSignal from_origin(TimeSignal x) {
  if (x.origin_index > 0) {
    x.samples.insert(x.samples.begin(), static_cast<std::size_t>(x.origin_index), Complex{});
    x.origin_index = 0;
  }
  return x;
}

/// Relay reception: both users through their channels and CFOs plus AWGN.
/// Frames are placed on the receive timeline by their origin_index.
inline TimeSignal superpose_uplink(const TimeSignal& frame_A, const TimeSignal& frame_B, const UplinkScenario& s,
                                   Rng& rng) {
  TimeSignal y = apply_cfo(apply_channel(frame_A, s.taps_A), s.cfo_A);
  accumulate(y, apply_cfo(apply_channel(frame_B, s.effective_taps_B()), s.cfo_B));
  return add_awgn(from_origin(std::move(y)), s.noise_variance, rng);
}

/// Single-user link (downlink or one uplink slot).
inline TimeSignal transmit_p2p(const TimeSignal& frame, const ChannelTaps& taps, CfoSpec cfo, double noise_variance,
                               Rng& rng) {
  return add_awgn(from_origin(apply_cfo(apply_channel(frame, taps), cfo)), noise_variance, rng);
}

inline double snr_db_to_noise_variance(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

}  // namespace fpnc
