#pragma once

// Monte Carlo harness for the three two-way relay schemes: per-trial
// exchanges, Wilson intervals, slot-count throughput and SNR sweeps.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "fpnc/channel.hpp"
#include "fpnc/codec.hpp"
#include "fpnc/endnode.hpp"
#include "fpnc/ofdm.hpp"
#include "fpnc/relay.hpp"

namespace fpnc {

enum class Scheme { FPNC, SNC, TS };

inline int slots(Scheme s) {
  switch (s) {
    case Scheme::FPNC: return 2;
    case Scheme::SNC: return 3;
    default: return 4;
  }
}

inline const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::FPNC: return "FPNC";
    case Scheme::SNC: return "SNC";
    default: return "TS";
  }
}

struct TrialOptions {
  OfdmParams ofdm;
  SyncParams sync;
  CfoStrategy strategy = CfoStrategy::Mean;
  CfoEstimator estimator = CfoEstimator::Median;
  MappingRule rule = MappingRule::LogMax;
  CfoOutliers outliers;
  bool genie_sync = false;
  /// Independent uniform carrier phase per user and per transmission.
  bool random_phase = true;
  bool downlink = true;
  std::size_t lead_in = 32;
  std::size_t tail = 32;
};

struct TrialRecord {
  Scheme scheme = Scheme::FPNC;
  double snr_db = 0.0;
  std::size_t offset = 0;
  std::uint64_t seed = 0;
  bool uplink_frame_error = false;
  bool sync_failure = false;
  std::vector<bool> p2p_frame_errors;
  std::size_t xor_bit_errors = 0;
  std::size_t total_bits = 0;

  bool operator==(const TrialRecord&) const = default;
};

/// Extra per-trial observables: the relay's internals and end-node recovery.
struct FpncTrace {
  RelayOutput relay;
  bool a_recovers_b = false;
  bool b_recovers_a = false;
};

namespace detail {

inline TimeSignal place(TimeSignal frame, const TrialOptions& opt) {
  frame.samples.resize(frame.size() + opt.tail);
  frame.origin_index = static_cast<long>(opt.lead_in);
  return frame;
}

inline ChannelTaps with_phase(const ChannelTaps& t, Rng& rng, bool random) {
  return random ? t.rotated(2.0 * std::numbers::pi * rng.uniform()) : t;
}

inline long true_boundary(const FrameLayout& L, const TrialOptions& opt) {
  return static_cast<long>(opt.lead_in + L.lts_unit_offset(NodeRole::A, opt.ofdm));
}

struct LegResult {
  bool error = true;
  std::size_t bit_errors = 0;
  std::size_t bits = 0;
  std::optional<BitVector> decoded;
};

/// One point-to-point transmission of `payload` over (taps, cfo).
inline LegResult p2p_leg(const BitVector& payload, const ChannelTaps& taps, CfoSpec cfo, double sigma2, Rng& rng,
                         const TrialOptions& opt) {
  auto [frame, layout] = build_frame(NodeRole::A, payload, opt.ofdm);
  const TimeSignal y = transmit_p2p(place(std::move(frame), opt), with_phase(taps, rng, opt.random_phase), cfo, sigma2, rng);
  P2pOptions po;
  po.sync = opt.sync;
  po.estimator = opt.estimator;
  if (opt.genie_sync) po.genie_boundary = true_boundary(layout, opt);
  auto rx = p2p_receive(y, layout, opt.ofdm, po);
  LegResult r;
  if (!rx.sync_ok) return r;
  r.bits = payload.size();
  r.bit_errors = hamming_distance(rx.decoded_bits, payload);
  r.error = r.bit_errors > 0;
  r.decoded = std::move(rx.decoded_bits);
  return r;
}

}  // namespace detail

/// Both users transmit simultaneously; the relay maps the superposition to
/// the XOR packet and broadcasts it.
inline TrialRecord run_fpnc_trial(const UplinkScenario& scenario, const BitVector& payload_A,
                                  const BitVector& payload_B, Rng& rng, const TrialOptions& opt = {},
                                  FpncTrace* trace = nullptr) {
  TrialRecord rec;
  rec.scheme = Scheme::FPNC;
  rec.offset = scenario.offset_B;
  rec.seed = rng.seed();

  UplinkScenario sc = scenario;
  sc.taps_A = detail::with_phase(scenario.taps_A, rng, opt.random_phase);
  sc.taps_B = detail::with_phase(scenario.taps_B, rng, opt.random_phase);
  auto [fa, layout] = build_frame(NodeRole::A, payload_A, opt.ofdm);
  auto [fb, layout_b] = build_frame(NodeRole::B, payload_B, opt.ofdm);
  const TimeSignal y = superpose_uplink(detail::place(std::move(fa), opt), detail::place(std::move(fb), opt), sc, rng);

  RelayConfig cfg;
  cfg.ofdm = opt.ofdm;
  cfg.sync = opt.sync;
  cfg.strategy = opt.strategy;
  cfg.estimator = opt.estimator;
  cfg.rule = opt.rule;
  cfg.noise_variance = scenario.noise_variance;
  cfg.outliers = opt.outliers;
  cfg.build_downlink = opt.downlink;
  if (opt.genie_sync) {
    cfg.genie_boundary_A = detail::true_boundary(layout, opt);
    cfg.genie_offset = static_cast<long>(scenario.offset_B);
  }
  RelayOutput relay = relay_receive(y, layout, cfg);

  const BitVector truth = xor_bits(payload_A, payload_B);
  if (!relay.ok) {
    rec.sync_failure = true;
    rec.uplink_frame_error = true;
  } else {
    rec.total_bits = truth.size();
    rec.xor_bit_errors = hamming_distance(relay.frame.xor_source_bits, truth);
    rec.uplink_frame_error = rec.xor_bit_errors > 0;
  }

  bool a_ok = false, b_ok = false;
  if (relay.ok && opt.downlink) {
    const FrameLayout& dl = relay.frame.downlink_layout;
    P2pOptions po;
    po.sync = opt.sync;
    po.estimator = opt.estimator;
    if (opt.genie_sync) po.genie_boundary = detail::true_boundary(dl, opt);
    const std::pair<const ChannelTaps*, CfoSpec> legs[2] = {{&scenario.taps_A, CfoSpec{-scenario.cfo_A.phi}},
                                                            {&scenario.taps_B, CfoSpec{-scenario.cfo_B.phi}}};
    for (int i = 0; i < 2; ++i) {
      const TimeSignal yd = transmit_p2p(detail::place(relay.frame.downlink_signal, opt),
                                         detail::with_phase(*legs[i].first, rng, opt.random_phase), legs[i].second,
                                         scenario.noise_variance, rng);
      const auto rx = p2p_receive(yd, dl, opt.ofdm, po);
      const bool err = !rx.sync_ok || rx.decoded_bits != relay.frame.xor_source_bits;
      rec.p2p_frame_errors.push_back(err);
      if (rx.sync_ok) {
        if (i == 0) a_ok = extract_partner(rx.decoded_bits, payload_A) == payload_B;
        else b_ok = extract_partner(rx.decoded_bits, payload_B) == payload_A;
      }
    }
  }
  if (trace) {
    trace->relay = std::move(relay);
    trace->a_recovers_b = a_ok;
    trace->b_recovers_a = b_ok;
  }
  return rec;
}

/// XOR bit errors of the relay's combination of two separate decodes.
inline std::size_t snc_xor_errors(const BitVector& decoded_A, const BitVector& decoded_B, const BitVector& payload_A,
                                  const BitVector& payload_B) {
  return hamming_distance(xor_bits(decoded_A, decoded_B), xor_bits(payload_A, payload_B));
}

/// Two single-user uplink slots; the relay XORs its two decodes and
/// broadcasts the result.
inline TrialRecord run_snc_trial(const UplinkScenario& scenario, const BitVector& payload_A,
                                 const BitVector& payload_B, Rng& rng, const TrialOptions& opt = {}) {
  TrialRecord rec;
  rec.scheme = Scheme::SNC;
  rec.offset = scenario.offset_B;
  rec.seed = rng.seed();
  const double s2 = scenario.noise_variance;
  const auto up_a = detail::p2p_leg(payload_A, scenario.taps_A, scenario.cfo_A, s2, rng, opt);
  const auto up_b = detail::p2p_leg(payload_B, scenario.taps_B, scenario.cfo_B, s2, rng, opt);
  rec.p2p_frame_errors = {up_a.error, up_b.error};
  if (!up_a.decoded || !up_b.decoded) {
    rec.sync_failure = true;
    rec.uplink_frame_error = true;
    return rec;
  }
  const BitVector relay_xor = xor_bits(*up_a.decoded, *up_b.decoded);
  rec.total_bits = payload_A.size();
  rec.xor_bit_errors = snc_xor_errors(*up_a.decoded, *up_b.decoded, payload_A, payload_B);
  rec.uplink_frame_error = rec.xor_bit_errors > 0;
  if (opt.downlink) {
    rec.p2p_frame_errors.push_back(
        detail::p2p_leg(relay_xor, scenario.taps_A, CfoSpec{-scenario.cfo_A.phi}, s2, rng, opt).error);
    rec.p2p_frame_errors.push_back(
        detail::p2p_leg(relay_xor, scenario.taps_B, CfoSpec{-scenario.cfo_B.phi}, s2, rng, opt).error);
  }
  return rec;
}

/// Four point-to-point slots: A->R, R->B, B->R, R->A.
inline TrialRecord run_ts_trial(const UplinkScenario& scenario, const BitVector& payload_A, const BitVector& payload_B,
                                Rng& rng, const TrialOptions& opt = {}) {
  TrialRecord rec;
  rec.scheme = Scheme::TS;
  rec.offset = scenario.offset_B;
  rec.seed = rng.seed();
  const double s2 = scenario.noise_variance;
  auto count = [&](const detail::LegResult& r) {
    rec.p2p_frame_errors.push_back(r.error);
    rec.xor_bit_errors += r.bit_errors;
    rec.total_bits += r.bits;
    if (!r.decoded) rec.sync_failure = true;
  };
  const auto up_a = detail::p2p_leg(payload_A, scenario.taps_A, scenario.cfo_A, s2, rng, opt);
  count(up_a);
  if (up_a.decoded && opt.downlink)
    count(detail::p2p_leg(*up_a.decoded, scenario.taps_B, CfoSpec{-scenario.cfo_B.phi}, s2, rng, opt));
  const auto up_b = detail::p2p_leg(payload_B, scenario.taps_B, scenario.cfo_B, s2, rng, opt);
  count(up_b);
  if (up_b.decoded && opt.downlink)
    count(detail::p2p_leg(*up_b.decoded, scenario.taps_A, CfoSpec{-scenario.cfo_A.phi}, s2, rng, opt));
  rec.uplink_frame_error = up_a.error || up_b.error;
  return rec;
}

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

/// Wilson score interval at 95%.
inline Interval wilson_interval(std::size_t successes, std::size_t n) {
  if (n == 0) return {0.0, 1.0};
  constexpr double z = 1.959963984540054;
  const double nn = static_cast<double>(n);
  const double ph = static_cast<double>(successes) / nn;
  const double den = 1.0 + z * z / nn;
  const double centre = (ph + z * z / (2.0 * nn)) / den;
  const double half = z * std::sqrt(ph * (1.0 - ph) / nn + z * z / (4.0 * nn * nn)) / den;
  return {successes == 0 ? 0.0 : std::max(0.0, centre - half), successes == n ? 1.0 : std::min(1.0, centre + half)};
}

inline bool intervals_overlap(const Interval& a, const Interval& b) { return a.low <= b.high && b.low <= a.high; }

struct Throughputs {
  double fpnc = 0.0;
  double snc = 0.0;
  double ts = 0.0;
};

/// Per-direction throughput from slot counts and frame error rates.
inline Throughputs throughput(double fer_uplink_pnc, double fer_uplink_snc, double fer_p2p) {
  for (double f : {fer_uplink_pnc, fer_uplink_snc, fer_p2p})
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("throughput: frame error rate outside [0, 1]");
  return {0.5 * (1.0 - fer_uplink_pnc) * (1.0 - fer_p2p), (1.0 / 3.0) * (1.0 - fer_uplink_snc) * (1.0 - fer_p2p),
          0.25 * (1.0 - fer_p2p) * (1.0 - fer_p2p)};
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct SweepConfig {
  /// Taps and CFOs; offset and noise variance are set per sweep point.
  UplinkScenario scenario;
  std::vector<double> snr_db{5.0, 10.0, 15.0, 20.0};
  std::vector<std::size_t> offsets{8};
  std::vector<Scheme> schemes{Scheme::FPNC, Scheme::SNC, Scheme::TS};
  std::size_t trials = 500;
  std::uint64_t seed = 1;
  std::size_t payload_bits = 1000;
  TrialOptions trial;
  std::size_t threads = 1;
  bool allow_cp_violation = false;
};

struct SweepRow {
  Scheme scheme = Scheme::FPNC;
  double snr_db = 0.0;
  std::size_t offset = 0;
  std::size_t trials = 0;
  std::size_t frame_errors = 0;
  std::size_t sync_failures = 0;
  double fer = 0.0;
  Interval fer_ci;
  std::size_t bit_errors = 0;
  std::size_t bits = 0;
  double ber = 0.0;
  Interval ber_ci;
  double p2p_fer = 0.0;
  double throughput = 0.0;
};

struct SweepSummary {
  std::vector<SweepRow> rows;
  std::vector<TrialRecord> records;

  const SweepRow* find(Scheme s, double snr, std::size_t offset) const {
    for (const auto& r : rows)
      if (r.scheme == s && r.snr_db == snr && r.offset == offset) return &r;
    return nullptr;
  }
};

/// Rejects configurations that would silently break the model's assumptions.
inline void validate_sweep(const SweepConfig& c) {
  c.trial.ofdm.validate();
  c.scenario.taps_A.validate();
  c.scenario.taps_B.validate();
  if (c.snr_db.empty()) throw ConfigError("sweep: no SNR points");
  if (c.offsets.empty()) throw ConfigError("sweep: no offsets");
  if (c.schemes.empty()) throw ConfigError("sweep: no schemes");
  if (c.trials == 0) throw ConfigError("sweep: trials must be positive");
  if (c.payload_bits == 0) throw ConfigError("sweep: empty payload");
  const double cap = cfo_cap(c.trial.ofdm.n_fft);
  for (double phi : {c.scenario.cfo_A.phi, c.scenario.cfo_B.phi})
    if (std::abs(phi) > cap) throw ConfigError("sweep: |CFO| " + std::to_string(phi) + " exceeds cap " + std::to_string(cap));
  for (double s : c.snr_db)
    if (!std::isfinite(s)) throw ConfigError("sweep: non-finite SNR");
  for (std::size_t off : c.offsets) {
    UplinkScenario s = c.scenario;
    s.offset_B = off;
    const std::size_t D = delay_spread(s);
    if (D > c.trial.ofdm.cp_len && !c.allow_cp_violation)
      throw ConfigError("delay spread " + std::to_string(D) + " exceeds cyclic prefix " +
                        std::to_string(c.trial.ofdm.cp_len) + " at offset " + std::to_string(off) +
                        " (pass --allow-cp-violation to run it as a negative control)");
  }
}

/// Runs fn(i) for i in [0, n) on `threads` workers.
inline void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mu;
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

/// Per-trial generator: a function of the trial's coordinates only.
/// Offsets share streams, so offset comparisons see the same payloads, phases and noise.
inline Rng trial_rng(std::uint64_t seed, Scheme s, std::size_t snr_index, std::size_t trial) {
  return Rng(seed).derive(static_cast<std::uint64_t>(s), snr_index, trial);
}

inline TrialRecord run_trial(Scheme s, const UplinkScenario& sc, std::size_t payload_bits, Rng& rng,
                             const TrialOptions& opt, FpncTrace* trace = nullptr) {
  const BitVector a = random_bits(payload_bits, rng);
  const BitVector b = random_bits(payload_bits, rng);
  switch (s) {
    case Scheme::FPNC: return run_fpnc_trial(sc, a, b, rng, opt, trace);
    case Scheme::SNC: return run_snc_trial(sc, a, b, rng, opt);
    default: return run_ts_trial(sc, a, b, rng, opt);
  }
}

using TrialObserver = std::function<void(const TrialRecord&, const FpncTrace*)>;

inline SweepSummary snr_sweep(const SweepConfig& c, const TrialObserver& observer = {}) {
  validate_sweep(c);
  struct Task {
    Scheme scheme;
    std::size_t snr_index;
    std::size_t offset;
    std::size_t trial;
  };
  std::vector<Task> tasks;
  for (Scheme s : c.schemes)
    for (std::size_t i = 0; i < c.snr_db.size(); ++i)
      for (std::size_t off : c.offsets)
        for (std::size_t t = 0; t < c.trials; ++t) tasks.push_back({s, i, off, t});

  SweepSummary out;
  out.records.resize(tasks.size());
  std::vector<std::optional<FpncTrace>> traces(observer ? tasks.size() : 0);
  parallel_for(tasks.size(), c.threads, [&](std::size_t i) {
    const Task& t = tasks[i];
    UplinkScenario sc = c.scenario;
    sc.offset_B = t.offset;
    sc.noise_variance = snr_db_to_noise_variance(c.snr_db[t.snr_index]);
    Rng rng = trial_rng(c.seed, t.scheme, t.snr_index, t.trial);
    FpncTrace trace;
    TrialRecord rec = run_trial(t.scheme, sc, c.payload_bits, rng, c.trial, observer ? &trace : nullptr);
    rec.snr_db = c.snr_db[t.snr_index];
    out.records[i] = std::move(rec);
    if (observer && t.scheme == Scheme::FPNC) traces[i] = std::move(trace);
  });
  if (observer)
    for (std::size_t i = 0; i < tasks.size(); ++i) observer(out.records[i], traces[i] ? &*traces[i] : nullptr);

  // Pooled point-to-point FER per (snr, offset) over every P2P leg.
  std::map<std::pair<double, std::size_t>, std::pair<std::size_t, std::size_t>> p2p;
  for (const auto& r : out.records) {
    auto& [err, n] = p2p[{r.snr_db, r.offset}];
    for (bool e : r.p2p_frame_errors) {
      err += e;
      ++n;
    }
  }

  for (Scheme s : c.schemes)
    for (double snr : c.snr_db)
      for (std::size_t off : c.offsets) {
        SweepRow row;
        row.scheme = s;
        row.snr_db = snr;
        row.offset = off;
        std::size_t p2p_err = 0, p2p_n = 0;
        for (const auto& r : out.records) {
          if (r.scheme != s || r.snr_db != snr || r.offset != off) continue;
          ++row.trials;
          row.sync_failures += r.sync_failure;
          row.bit_errors += r.xor_bit_errors;
          row.bits += r.total_bits;
          if (s == Scheme::TS) {
            for (bool e : r.p2p_frame_errors) {
              p2p_err += e;
              ++p2p_n;
            }
          } else {
            row.frame_errors += r.uplink_frame_error;
          }
        }
        const auto [perr, pn] = p2p[{snr, off}];
        row.p2p_fer = pn ? static_cast<double>(perr) / static_cast<double>(pn) : 0.0;
        if (s == Scheme::TS) {
          row.frame_errors = p2p_err;
          row.fer = p2p_n ? static_cast<double>(p2p_err) / static_cast<double>(p2p_n) : 0.0;
          row.fer_ci = wilson_interval(p2p_err, p2p_n);
        } else {
          row.fer = row.trials ? static_cast<double>(row.frame_errors) / static_cast<double>(row.trials) : 0.0;
          row.fer_ci = wilson_interval(row.frame_errors, row.trials);
        }
        row.ber = row.bits ? static_cast<double>(row.bit_errors) / static_cast<double>(row.bits) : 0.0;
        row.ber_ci = wilson_interval(row.bit_errors, row.bits);
        const Throughputs th = throughput(s == Scheme::FPNC ? row.fer : 0.0, s == Scheme::SNC ? row.fer : 0.0, row.p2p_fer);
        row.throughput = s == Scheme::FPNC ? th.fpnc : s == Scheme::SNC ? th.snc : th.ts;
        out.rows.push_back(row);
      }
  return out;
}

inline void write_csv(const SweepSummary& s, std::ostream& os) {
  os << "scheme,snr_db,offset,trials,fer,fer_ci_low,fer_ci_high,ber,ber_ci_low,ber_ci_high,throughput\n";
  char buf[512];
  for (const auto& r : s.rows) {
    std::snprintf(buf, sizeof buf, "%s,%g,%zu,%zu,%.6f,%.6f,%.6f,%.8f,%.8f,%.8f,%.6f\n", to_string(r.scheme), r.snr_db,
                  r.offset, r.trials, r.fer, r.fer_ci.low, r.fer_ci.high, r.ber, r.ber_ci.low, r.ber_ci.high,
                  r.throughput);
    os << buf;
  }
}

// ---------------------------------------------------------------------------
// Model checks
// ---------------------------------------------------------------------------

/// Max-norm relative mismatch between the received spectrum of data symbol m
/// and H_A X_A + H_B X_B for a noiseless, CFO-free scenario. The DFT window
/// starts `backoff` samples into the CP; H includes that shift.
inline double alignment_residual(const UplinkScenario& sc, const OfdmParams& p, Rng& rng, std::size_t m = 0,
                                 std::size_t backoff = 1) {
  const BitVector a = random_bits(2 * p.n_data_subcarriers, rng);
  const BitVector b = random_bits(2 * p.n_data_subcarriers, rng);
  const auto [fa, layout] = build_frame(NodeRole::A, a, p);
  const auto [fb, layout_b] = build_frame(NodeRole::B, b, p);
  UplinkScenario s = sc;
  s.noise_variance = 0.0;
  s.cfo_A.phi = s.cfo_B.phi = 0.0;
  Rng unused(0);
  const TimeSignal y = superpose_uplink(fa, fb, s, unused);
  const SampleSpan pay = layout.data_symbol_spans.at(m).payload;
  const Spectrum Y = dft(window(y, static_cast<long>(pay.begin - backoff), p.n_fft).samples);
  const Spectrum XA = dft(window(fa, static_cast<long>(pay.begin), p.n_fft).samples);
  const Spectrum XB = dft(window(fb, static_cast<long>(pay.begin), p.n_fft).samples);
  const Spectrum HA = dft(s.taps_A.delayed(backoff).padded(p.n_fft).samples);
  const Spectrum HB = dft(s.effective_taps_B().delayed(backoff).padded(p.n_fft).samples);
  double err = 0.0, ref = 0.0;
  for (std::size_t k = 0; k < p.n_fft; ++k) {
    const Complex pred = HA[k] * XA[k] + HB[k] * XB[k];
    err = std::max(err, std::abs(Y[k] - pred));
    ref = std::max(ref, std::abs(pred));
  }
  return ref > 0.0 ? err / ref : err;
}

/// Random channel: dominant unit first tap plus an optional echo, all within
/// max_len samples of the first path.
inline ChannelTaps random_two_tap(Rng& rng, std::size_t max_len, double max_echo = 0.6) {
  const Complex first = std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform());
  if (max_len < 2) return ChannelTaps({first});
  const std::size_t delay = 1 + rng.index(max_len - 1);
  Samples taps(delay + 1);
  taps.front() = first;
  taps.back() = std::polar(max_echo * (0.05 + 0.95 * rng.uniform()), 2.0 * std::numbers::pi * rng.uniform());
  return ChannelTaps(std::move(taps));
}

/// Noiseless two-way exchange over random channels at the given offset.
/// Returns true when both end nodes recover their partner's packet.
inline bool noiseless_exchange(std::size_t offset, Rng& rng, const TrialOptions& base = {}, std::size_t payload_bits = 400,
                               double cfo_A = 0.0, double cfo_B = 0.0) {
  const std::size_t C = base.ofdm.cp_len;
  UplinkScenario sc;
  sc.taps_A = random_two_tap(rng, C);
  sc.taps_B = offset + 2 <= C ? random_two_tap(rng, C - offset) : random_two_tap(rng, 1);
  sc.offset_B = offset;
  sc.cfo_A.phi = cfo_A;
  sc.cfo_B.phi = cfo_B;
  TrialOptions opt = base;
  FpncTrace trace;
  const BitVector a = random_bits(payload_bits, rng);
  const BitVector b = random_bits(payload_bits, rng);
  const TrialRecord rec = run_fpnc_trial(sc, a, b, rng, opt, &trace);
  return !rec.uplink_frame_error && trace.a_recovers_b && trace.b_recovers_a;
}

}  // namespace fpnc
