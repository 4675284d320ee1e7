#pragma once

// Relay receive-and-forward chain: STS timing (coarse peaks, fine LTS
// correlation), dual CFO estimation and compensation, LTS channel
// estimation, pilot tracking, per-tone XOR mapping and XOR-CD decoding.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fpnc/channel.hpp"
#include "fpnc/codec.hpp"
#include "fpnc/ofdm.hpp"
#include "fpnc/signal.hpp"

namespace fpnc {

// ---------------------------------------------------------------------------
// Timing
// ---------------------------------------------------------------------------

struct SyncParams {
  double threshold = 0.5;
  std::size_t neighborhood = 4;
  /// Peaks further apart than this end an STS run.
  std::size_t max_gap = 24;
  std::size_t min_peaks = 8;
  /// Correlator search span from the start of the buffer.
  std::size_t search_len = 640;
  /// Fine LTS search range around the coarse boundary.
  long fine_early = 72;
  long fine_late = 24;
  /// Earliest LTS correlation within this fraction of the maximum wins.
  double fine_ratio = 0.75;
  /// A's LTS correlation below this is a false lock.
  double fine_min = 0.5;
};

struct SyncResult {
  bool ok = false;
  std::string failure;
  /// Absolute indices of the STS peaks used for timing.
  std::vector<long> peak_indices;
  /// Absolute index of the first LTS unit (after its CP) of each node.
  long lts_boundary_A = 0;
  long lts_boundary_B = 0;
  long detected_offset = 0;
  long coarse_boundary = 0;
};

/// Samples [start, start+len) on the absolute timeline; zeros outside y.
inline TimeSignal window(const TimeSignal& y, long start, std::size_t len) {
  Samples out(len);
  for (std::size_t i = 0; i < len; ++i) {
    const long j = start + static_cast<long>(i) - y.origin_index;
    if (j >= 0 && j < static_cast<long>(y.size())) out[i] = y[static_cast<std::size_t>(j)];
  }
  return TimeSignal(std::move(out), start);
}

/// Normalized correlation of y against a reference at every lag in
/// [begin, end) (buffer-relative): |sum r* y| / sqrt(sum|r|^2 sum|y|^2).
inline std::vector<double> normalized_correlation(const TimeSignal& y, const TimeSignal& ref, long begin, long end) {
  const long L = static_cast<long>(ref.size());
  const long last = static_cast<long>(y.size()) - L;
  begin = std::max(begin, 0L);
  end = std::min(end, last + 1);
  std::vector<double> out;
  if (end <= begin) return out;
  out.reserve(static_cast<std::size_t>(end - begin));
  const double ref_energy = mean_power(ref.samples) * static_cast<double>(L);
  for (long n = begin; n < end; ++n) {
    Complex acc{};
    double e = 0.0;
    for (long i = 0; i < L; ++i) {
      const Complex v = y[static_cast<std::size_t>(n + i)];
      acc += std::conj(ref[static_cast<std::size_t>(i)]) * v;
      e += std::norm(v);
    }
    const double den = std::sqrt(e * ref_energy);
    out.push_back(den > 0.0 ? std::abs(acc) / den : 0.0);
  }
  return out;
}

/// Z[n] of the short-training correlator over the first search_len samples.
inline std::vector<double> sts_metric(const TimeSignal& y, const TimeSignal& sts_unit, std::size_t search_len) {
  return normalized_correlation(y, sts_unit, 0, static_cast<long>(search_len));
}

/// Local maxima of Z at or above the threshold (buffer-relative indices).
inline std::vector<long> find_peaks(const std::vector<double>& Z, double threshold, std::size_t nb) {
  std::vector<long> peaks;
  const long n = static_cast<long>(Z.size());
  const long w = static_cast<long>(nb);
  for (long i = 0; i < n; ++i) {
    if (Z[static_cast<std::size_t>(i)] < threshold) continue;
    bool is_max = true;
    for (long j = std::max(0L, i - w); j <= std::min(n - 1, i + w) && is_max; ++j) {
      if (j < i) is_max = Z[static_cast<std::size_t>(j)] < Z[static_cast<std::size_t>(i)];
      else if (j > i) is_max = Z[static_cast<std::size_t>(j)] <= Z[static_cast<std::size_t>(i)];
    }
    if (is_max) peaks.push_back(i);
  }
  return peaks;
}

namespace detail {

inline bool has_partner(const std::vector<long>& run, long p, long delta, long tol) {
  return std::any_of(run.begin(), run.end(), [&](long q) { return std::abs(q - p - delta) <= tol; });
}

/// Longest run of closely spaced peaks that shows the unit periodicity,
/// trimmed at both ends to peaks that continue the comb and capped at
/// max_span after its first peak.
inline std::vector<long> sts_run(const std::vector<long>& peaks, long unit, long max_gap, long max_span) {
  std::vector<std::vector<long>> runs;
  for (long p : peaks) {
    if (runs.empty() || p - runs.back().back() > max_gap) runs.emplace_back();
    runs.back().push_back(p);
  }
  std::vector<long> best;
  for (const auto& r : runs) {
    const bool comb = std::any_of(r.begin(), r.end(), [&](long p) { return has_partner(r, p, unit, 2); });
    if (comb && r.size() > best.size()) best = r;
  }
  while (best.size() > 1 && !has_partner(best, best.back(), -unit, 2)) best.pop_back();
  while (best.size() > 1 && !has_partner(best, best.front(), unit, 2)) best.erase(best.begin());
  while (best.size() > 1 && best.back() - best.front() > max_span) best.pop_back();
  while (best.size() > 1 && !has_partner(best, best.back(), -unit, 2)) best.pop_back();
  return best;
}

/// Earliest lag in [lo, hi] whose LTS correlation reaches ratio * max.
inline std::optional<long> first_strong_lag(const TimeSignal& y, const TimeSignal& ref, long lo, long hi,
                                            double ratio, double floor = 0.0) {
  const long b = lo - y.origin_index, e = hi + 1 - y.origin_index;
  const auto c = normalized_correlation(y, ref, b, e);
  if (c.empty()) return std::nullopt;
  const double peak = *std::max_element(c.begin(), c.end());
  if (peak <= floor || peak <= 0.0) return std::nullopt;
  const long first = std::max(b, 0L);
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c[i] >= ratio * peak) return first + static_cast<long>(i) + y.origin_index;
  return std::nullopt;
}

}  // namespace detail

/// Timing acquisition on the overlapped preamble. The STS correlator peaks
/// give a coarse LTS boundary via the last-two-peaks rule; the known LTS
/// unit refines A's boundary and locates B's slot.
inline SyncResult sts_sync(const TimeSignal& y, const TimeSignal& sts_unit, const OfdmParams& p = {},
                           const SyncParams& sp = {}, bool two_users = true) {
  SyncResult r;
  const long unit = static_cast<long>(sts_unit.size());
  const auto Z = sts_metric(y, sts_unit, sp.search_len);
  const auto peaks = find_peaks(Z, sp.threshold, sp.neighborhood);
  // A's ten units plus B's lag, with a little jitter allowance.
  const long span = static_cast<long>(p.sts_len()) - unit + static_cast<long>(p.cp_len) + 2;
  const auto run = detail::sts_run(peaks, unit, static_cast<long>(sp.max_gap), span);
  for (long q : run) r.peak_indices.push_back(q + y.origin_index);
  if (run.size() < sp.min_peaks) {
    r.failure = "sync: " + std::to_string(run.size()) + " STS peaks";
    return r;
  }
  const long last = run.back();
  const long a_end = run.size() >= 2 && last - run[run.size() - 2] < unit - 1 ? run[run.size() - 2] : last;
  r.coarse_boundary = a_end + unit + static_cast<long>(p.cp_len) + y.origin_index;

  const TimeSignal lts = lts_unit(p);
  const auto a = detail::first_strong_lag(y, lts, r.coarse_boundary - sp.fine_early, r.coarse_boundary + sp.fine_late,
                                          sp.fine_ratio, sp.fine_min);
  if (!a) {
    r.failure = "sync: no LTS correlation";
    return r;
  }
  r.lts_boundary_A = *a;
  r.lts_boundary_B = *a;
  if (two_users) {
    const long slot = static_cast<long>(p.lts_slot_len());
    const auto b = detail::first_strong_lag(y, lts, *a + slot, *a + slot + static_cast<long>(p.cp_len), sp.fine_ratio);
    r.lts_boundary_B = b ? *b : *a + slot;
    r.detected_offset = r.lts_boundary_B - *a - slot;
  }
  r.ok = true;
  return r;
}

// ---------------------------------------------------------------------------
// CFO
// ---------------------------------------------------------------------------

enum class CfoEstimator { Median, Mean };
enum class CfoStrategy { Mean, AOnly, BOnly };

/// Corruption hook: overwrite `count` of the per-sample angles (evenly spread)
/// with `angle` before reduction.
struct CfoOutliers {
  std::size_t count = 0;
  double angle = 0.0;
};

struct CfoEstimate {
  double phi_hat_A = 0.0;
  double phi_hat_B = 0.0;
  double phi_tilde = 0.0;

  static CfoEstimate of(double a, double b) { return {a, b, 0.5 * (a + b)}; }
};

/// Per-sample estimates angle(y*[n] y[n+N]) / N for n = 0..N-1.
inline std::vector<double> cfo_phase_samples(const TimeSignal& y_lts, std::size_t N) {
  if (y_lts.size() < 2 * N) throw ConfigError("estimate_cfo: window shorter than two units");
  std::vector<double> out(N);
  for (std::size_t n = 0; n < N; ++n) out[n] = std::arg(std::conj(y_lts[n]) * y_lts[n + N]) / static_cast<double>(N);
  return out;
}

inline double reduce_cfo(std::vector<double> v, CfoEstimator est) {
  if (v.empty()) return 0.0;
  if (est == CfoEstimator::Mean) return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
  if (v.size() % 2) return v[mid];
  const double hi = v[mid];
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<long>(mid));
  return 0.5 * (lo + hi);
}

inline void inject_outliers(std::vector<double>& v, const CfoOutliers& o, std::size_t N) {
  if (o.count == 0) return;
  const std::size_t k = std::min(o.count, v.size());
  for (std::size_t i = 0; i < k; ++i) v[i * v.size() / k] = o.angle / static_cast<double>(N);
}

inline double estimate_cfo_one(const TimeSignal& y_lts, std::size_t N, CfoEstimator est = CfoEstimator::Median,
                               const CfoOutliers& outliers = {}) {
  auto v = cfo_phase_samples(y_lts, N);
  inject_outliers(v, outliers, N);
  return reduce_cfo(std::move(v), est);
}

inline double strategy_phi(CfoStrategy s, const CfoEstimate& e) {
  switch (s) {
    case CfoStrategy::AOnly: return e.phi_hat_A;
    case CfoStrategy::BOnly: return e.phi_hat_B;
    default: return e.phi_tilde;
  }
}

/// Multiplies sample n by e^{-j (n - sync_origin) phi}.
inline TimeSignal compensate_cfo(TimeSignal y, CfoStrategy strategy, const CfoEstimate& est, long sync_origin = 0) {
  const double phi = strategy_phi(strategy, est);
  if (phi == 0.0) return y;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double n = static_cast<double>(y.origin_index + static_cast<long>(i) - sync_origin);
    y[i] *= std::polar(1.0, -n * phi);
  }
  return y;
}

// ---------------------------------------------------------------------------
// Channel estimation and tracking
// ---------------------------------------------------------------------------

struct ChannelEstimate {
  /// Per-bin gains (FFT order); zero off the occupied band.
  Samples gains;
  NodeRole node = NodeRole::A;
  int symbol_index = -1;

  Complex at(int k, const OfdmParams& p) const { return gains[p.bin(k)]; }
};

struct LtsWindows {
  long unit1_A = 0, unit2_A = 0;
  long unit1_B = 0, unit2_B = 0;
};

/// Average of the per-unit estimates dft(unit)/X_LTS over the occupied band.
inline ChannelEstimate estimate_channel_one(const TimeSignal& y, long w1, long w2, const Spectrum& lts_ref,
                                            const OfdmParams& p, NodeRole node) {
  const double g = unit_power_gain(lts_ref);
  const Spectrum Y1 = dft(window(y, w1, p.n_fft).samples);
  const Spectrum Y2 = dft(window(y, w2, p.n_fft).samples);
  ChannelEstimate est{Samples(p.n_fft), node, -1};
  for (int k : p.occupied_band) {
    const std::size_t b = p.bin(k);
    const Complex x = lts_ref[b] * g;
    est.gains[b] = 0.5 * (Y1[b] / x + Y2[b] / x);
  }
  return est;
}

inline std::pair<ChannelEstimate, ChannelEstimate> estimate_channels(const TimeSignal& y, const LtsWindows& w,
                                                                     const Spectrum& lts_ref, const OfdmParams& p = {}) {
  return {estimate_channel_one(y, w.unit1_A, w.unit2_A, lts_ref, p, NodeRole::A),
          estimate_channel_one(y, w.unit1_B, w.unit2_B, lts_ref, p, NodeRole::B)};
}

/// Pilot-driven update for data symbol m: ratio at the node's two pilots,
/// straight line through them across the band, applied to the LTS estimate.
inline ChannelEstimate track_channel(const Spectrum& Y_m, const ChannelEstimate& base,
                                     const std::map<int, Complex>& pilots, const OfdmParams& p = {}, int m = 0) {
  std::vector<std::pair<int, Complex>> own;
  for (auto [k, v] : pilots)
    if (std::abs(v) > 0.0) own.emplace_back(k, v);
  if (own.size() != 2) throw ConfigError("track_channel: expected two pilots for the node");
  const auto [k1, p1] = own[0];
  const auto [k2, p2] = own[1];
  const Complex d1 = Y_m[p.bin(k1)] / (base.at(k1, p) * p1);
  const Complex d2 = Y_m[p.bin(k2)] / (base.at(k2, p) * p2);
  const Complex slope = (d2 - d1) / static_cast<double>(k2 - k1);
  ChannelEstimate out{Samples(p.n_fft), base.node, m};
  for (int k : p.occupied_band) {
    const Complex delta = d1 + slope * static_cast<double>(k - k1);
    out.gains[p.bin(k)] = base.at(k, p) * delta;
  }
  return out;
}

// ---------------------------------------------------------------------------
// XOR mapping
// ---------------------------------------------------------------------------

enum class MappingRule { LogMax, Exact };

/// Table 1: the nearest of +-(hA+hB) maps to +1, of +-(hA-hB) to -1.
inline int logmax_xor(Complex Y, Complex hA, Complex hB) {
  struct Point {
    Complex u;
    int xr;
  };
  const Point table[4] = {{hA + hB, 1}, {hA - hB, -1}, {-hA + hB, -1}, {-hA - hB, 1}};
  int best = table[0].xr;
  double best_d = std::norm(Y - table[0].u);
  for (int i = 1; i < 4; ++i) {
    const double d = std::norm(Y - table[i].u);
    if (d < best_d) {
      best_d = d;
      best = table[i].xr;
    }
  }
  return best;
}

inline double log_sum_exp(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

/// Likelihood-sum comparison over the two points of each XOR class.
inline int exact_xor(Complex Y, Complex hA, Complex hB, double sigma2) {
  if (!(sigma2 > 0.0)) return logmax_xor(Y, hA, hB);
  const Complex s = hA + hB, d = hA - hB;
  const double same = log_sum_exp(-std::norm(Y - s) / sigma2, -std::norm(Y + s) / sigma2);
  const double mixed = log_sum_exp(-std::norm(Y - d) / sigma2, -std::norm(Y + d) / sigma2);
  return same >= mixed ? 1 : -1;
}

inline int fpnc_map_tone(Complex Y, Complex hA, Complex hB, MappingRule rule, double sigma2 = 0.0) {
  return rule == MappingRule::Exact ? exact_xor(Y, hA, hB, sigma2) : logmax_xor(Y, hA, hB);
}

/// XOR symbols on the data tones of one OFDM symbol (ascending tone order).
inline std::vector<int> fpnc_map(const Spectrum& Y_m, const ChannelEstimate& H_A, const ChannelEstimate& H_B,
                                 MappingRule rule, const OfdmParams& p = {}, double sigma2 = 0.0) {
  std::vector<int> out;
  out.reserve(p.n_data_subcarriers);
  for (int k : p.data_subcarriers()) out.push_back(fpnc_map_tone(Y_m[p.bin(k)], H_A.at(k, p), H_B.at(k, p), rule, sigma2));
  return out;
}

// ---------------------------------------------------------------------------
// XOR-CD and forwarding
// ---------------------------------------------------------------------------

struct XorFrame {
  BitVector xor_coded_bits;
  BitVector xor_source_bits;
  TimeSignal downlink_signal;
  FrameLayout downlink_layout;
};

/// Hard demap of the XOR stream (pad already removed), Viterbi decode,
/// re-encode into a point-to-point downlink frame.
inline XorFrame cnc_decode_and_forward(const std::vector<int>& xor_symbols, const FrameLayout& layout,
                                       const OfdmParams& p = {}, bool build_downlink = true) {
  if (xor_symbols.size() < layout.channel_bits) throw ConfigError("cnc_decode_and_forward: short XOR stream");
  XorFrame f;
  std::vector<std::uint8_t> bits(layout.channel_bits);
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = xor_symbols[i] < 0 ? 1 : 0;
  f.xor_coded_bits = BitVector(std::move(bits), BitRole::Coded);
  if (layout.coded) {
    f.xor_source_bits = viterbi_decode(f.xor_coded_bits);
  } else {
    f.xor_source_bits = BitVector(f.xor_coded_bits.bits, BitRole::Source);
  }
  f.xor_source_bits.role = BitRole::Xor;
  if (build_downlink) {
    OfdmParams dp = p;
    dp.coded = layout.coded;
    auto [sig, dl] = build_frame(NodeRole::Relay, f.xor_source_bits, dp);
    f.downlink_signal = std::move(sig);
    f.downlink_layout = std::move(dl);
  }
  return f;
}

// ---------------------------------------------------------------------------
// Full relay chain
// ---------------------------------------------------------------------------

struct RelayConfig {
  OfdmParams ofdm;
  SyncParams sync;
  CfoStrategy strategy = CfoStrategy::Mean;
  CfoEstimator estimator = CfoEstimator::Median;
  MappingRule rule = MappingRule::LogMax;
  /// Time-domain sigma^2 for the exact rule.
  double noise_variance = 0.0;
  CfoOutliers outliers;
  /// Ground-truth boundary of A's first LTS unit and B's offset (bypasses sync).
  std::optional<long> genie_boundary_A;
  long genie_offset = 0;
  bool build_downlink = true;
};

struct RelayOutput {
  SyncResult sync;
  CfoEstimate cfo;
  ChannelEstimate H_A, H_B;
  std::size_t backoff = 0;
  std::vector<int> xor_symbols;
  XorFrame frame;
  bool ok = false;
};

/// DFT windows start one sample into the CP unless B's detected lag leaves
/// no room.
inline std::size_t window_backoff(long detected_offset, const OfdmParams& p) {
  return detected_offset + 1 <= static_cast<long>(p.cp_len) ? 1 : 0;
}

inline RelayOutput relay_receive(const TimeSignal& y, const FrameLayout& layout, const RelayConfig& cfg) {
  const OfdmParams& p = cfg.ofdm;
  RelayOutput out;
  if (cfg.genie_boundary_A) {
    out.sync.ok = true;
    out.sync.lts_boundary_A = *cfg.genie_boundary_A;
    out.sync.detected_offset = cfg.genie_offset;
    out.sync.lts_boundary_B = *cfg.genie_boundary_A + static_cast<long>(p.lts_slot_len()) + cfg.genie_offset;
  } else {
    out.sync = sts_sync(y, sts_unit(p), p, cfg.sync, true);
  }
  if (!out.sync.ok) return out;

  const long N = static_cast<long>(p.n_fft);
  const long a = out.sync.lts_boundary_A;
  const long frame0 = a - static_cast<long>(layout.lts_unit_offset(NodeRole::A, p));
  const std::size_t n2 = 2 * p.n_fft;
  out.cfo = CfoEstimate::of(estimate_cfo_one(window(y, a, n2), p.n_fft, cfg.estimator, cfg.outliers),
                            estimate_cfo_one(window(y, out.sync.lts_boundary_B, n2), p.n_fft, cfg.estimator,
                                             cfg.outliers));
  const TimeSignal yc = compensate_cfo(y, cfg.strategy, out.cfo, frame0);

  out.backoff = window_backoff(out.sync.detected_offset, p);
  const long bo = static_cast<long>(out.backoff);
  const long slot = static_cast<long>(p.lts_slot_len());
  const LtsWindows w{a - bo, a + N - bo, a + slot - bo, a + slot + N - bo};
  std::tie(out.H_A, out.H_B) = estimate_channels(yc, w, lts_freq(p), p);

  const double g = data_gain(p);
  const double sigma2_f = cfg.noise_variance * static_cast<double>(p.n_fft) / (g * g);
  const auto pilots_A = gen_pilots(NodeRole::A, 0, p);
  const auto pilots_B = gen_pilots(NodeRole::B, 0, p);
  out.xor_symbols.reserve(layout.n_symbols() * p.n_data_subcarriers);
  for (std::size_t m = 0; m < layout.n_symbols(); ++m) {
    const long start = frame0 + static_cast<long>(layout.data_symbol_spans[m].payload.begin) - bo;
    Spectrum Y = dft(window(yc, start, p.n_fft).samples);
    for (auto& v : Y.bins) v /= g;
    const auto HA = track_channel(Y, out.H_A, pilots_A, p, static_cast<int>(m));
    const auto HB = track_channel(Y, out.H_B, pilots_B, p, static_cast<int>(m));
    const auto sym = fpnc_map(Y, HA, HB, cfg.rule, p, sigma2_f);
    out.xor_symbols.insert(out.xor_symbols.end(), sym.begin(), sym.end());
  }
  out.xor_symbols.resize(layout.channel_bits);
  OfdmParams fp = p;
  fp.coded = layout.coded;
  out.frame = cnc_decode_and_forward(out.xor_symbols, layout, fp, cfg.build_downlink);
  out.ok = true;
  return out;
}

}  // namespace fpnc
