#pragma once

// OFDM numerology, the FPNC preamble (shared STS, time-orthogonal doubled
// LTS, per-node nulled pilots) and frame assembly.

#include <algorithm>
#include <array>
#include <map>
#include <utility>
#include <vector>

#include "fpnc/codec.hpp"
#include "fpnc/signal.hpp"

namespace fpnc {

enum class NodeRole { A, B, Relay };

inline const char* to_string(NodeRole r) {
  switch (r) {
    case NodeRole::A: return "A";
    case NodeRole::B: return "B";
    default: return "Relay";
  }
}

struct OfdmParams {
  std::size_t n_fft = 64;
  std::size_t cp_len = 16;
  std::size_t n_data_subcarriers = 48;
  std::array<int, 2> pilot_indices_A{-21, 7};
  std::array<int, 2> pilot_indices_B{-7, 21};
  std::vector<int> occupied_band = default_band();
  bool coded = true;

  static std::vector<int> default_band() {
    std::vector<int> band;
    for (int k = -26; k <= 26; ++k)
      if (k != 0) band.push_back(k);
    return band;
  }

  std::size_t bin(int k) const {
    const long n = static_cast<long>(n_fft);
    return static_cast<std::size_t>(((k % n) + n) % n);
  }

  std::size_t symbol_len() const { return n_fft + cp_len; }
  std::size_t sts_unit_len() const { return n_fft / 4; }
  std::size_t sts_len() const { return 10 * sts_unit_len(); }
  /// One node's LTS slot: CP plus two units.
  std::size_t lts_slot_len() const { return cp_len + 2 * n_fft; }
  std::size_t lts_len() const { return 2 * lts_slot_len(); }
  std::size_t preamble_len() const { return sts_len() + lts_len(); }

  const std::array<int, 2>& pilots(NodeRole role) const {
    return role == NodeRole::B ? pilot_indices_B : pilot_indices_A;
  }

  bool occupied(int k) const { return std::find(occupied_band.begin(), occupied_band.end(), k) != occupied_band.end(); }

  /// Occupied tones that carry neither node's pilot, ascending.
  std::vector<int> data_subcarriers() const {
    std::vector<int> out;
    for (int k : occupied_band) {
      const bool pilot = std::find(pilot_indices_A.begin(), pilot_indices_A.end(), k) != pilot_indices_A.end() ||
                         std::find(pilot_indices_B.begin(), pilot_indices_B.end(), k) != pilot_indices_B.end();
      if (!pilot) out.push_back(k);
    }
    return out;
  }

  void validate() const {
    detail::require_pow2(n_fft, "OfdmParams.n_fft");
    if (n_fft < 64) throw ConfigError("OfdmParams: n_fft must be at least 64");
    if (cp_len > n_fft) throw ConfigError("OfdmParams: cp_len exceeds n_fft");
    const long half = static_cast<long>(n_fft / 2);
    for (int k : occupied_band)
      if (k == 0 || k >= half || k < -half) throw ConfigError("OfdmParams: occupied tone out of range");
    for (int a : pilot_indices_A)
      for (int b : pilot_indices_B)
        if (a == b) throw ConfigError("OfdmParams: pilot sets of A and B overlap");
    for (int k : pilot_indices_A)
      if (!occupied(k)) throw ConfigError("OfdmParams: pilot outside occupied band");
    for (int k : pilot_indices_B)
      if (!occupied(k)) throw ConfigError("OfdmParams: pilot outside occupied band");
    if (data_subcarriers().size() != n_data_subcarriers)
      throw ConfigError("OfdmParams: occupied band minus pilots leaves " + std::to_string(data_subcarriers().size()) +
                        " data tones, expected " + std::to_string(n_data_subcarriers));
  }
};

// ---------------------------------------------------------------------------
// Training sequences
// ---------------------------------------------------------------------------

/// Gain that brings idft(X) to unit average power: N / sqrt(sum |X|^2).
inline double unit_power_gain(const Spectrum& X) {
  double p = 0.0;
  for (const auto& v : X.bins) p += std::norm(v);
  if (p <= 0.0) throw ConfigError("unit_power_gain: empty spectrum");
  return static_cast<double>(X.size()) / std::sqrt(p);
}

/// 802.11a short training tones (every fourth subcarrier, +-4..+-24).
inline Spectrum sts_freq(const OfdmParams& p) {
  static constexpr std::array<std::pair<int, int>, 12> kTones{{{-24, 1},
                                                                {-20, -1},
                                                                {-16, 1},
                                                                {-12, -1},
                                                                {-8, -1},
                                                                {-4, 1},
                                                                {4, -1},
                                                                {8, -1},
                                                                {12, 1},
                                                                {16, 1},
                                                                {20, 1},
                                                                {24, 1}}};
  Spectrum S(Samples(p.n_fft));
  const double a = std::sqrt(13.0 / 6.0);
  for (auto [k, s] : kTones) S[p.bin(k)] = a * Complex(s, s);
  return S;
}

/// 802.11a long training sequence, +-1 on tones -26..26 (0 at DC).
inline Spectrum lts_freq(const OfdmParams& p) {
  static constexpr std::array<int, 53> kL{1, 1, -1, -1, 1,  1, -1, 1, -1, 1, 1,  1,  1,  1,  1,  -1, -1, 1,
                                          1, -1, 1, -1, 1, 1, 1,  1, 0,  1, -1, -1, 1,  1,  -1, 1,  -1, 1,
                                          -1, -1, -1, -1, -1, 1, 1, -1, -1, 1, -1, 1, -1, 1,  1,  1,  1};
  Spectrum L(Samples(p.n_fft));
  for (int k = -26; k <= 26; ++k) L[p.bin(k)] = static_cast<double>(kL[static_cast<std::size_t>(k + 26)]);
  return L;
}

inline double sts_gain(const OfdmParams& p) { return unit_power_gain(sts_freq(p)); }
inline double lts_gain(const OfdmParams& p) { return unit_power_gain(lts_freq(p)); }

/// Gain applied to every data symbol: the node's two pilots plus the data tones.
inline double data_gain(const OfdmParams& p) {
  return static_cast<double>(p.n_fft) / std::sqrt(static_cast<double>(p.n_data_subcarriers + 2));
}

inline TimeSignal scaled_idft(const Spectrum& X, double gain) {
  TimeSignal x = idft(X);
  for (auto& v : x.samples) v *= gain;
  return x;
}

inline TimeSignal sts_unit(const OfdmParams& p) {
  TimeSignal full = scaled_idft(sts_freq(p), sts_gain(p));
  full.samples.resize(p.sts_unit_len());
  return full;
}

/// Ten repetitions of the short unit.
inline TimeSignal gen_sts(const OfdmParams& p) {
  const TimeSignal unit = sts_unit(p);
  Samples out;
  out.reserve(p.sts_len());
  for (int r = 0; r < 10; ++r) out.insert(out.end(), unit.samples.begin(), unit.samples.end());
  return TimeSignal(std::move(out));
}

inline TimeSignal lts_unit(const OfdmParams& p) { return scaled_idft(lts_freq(p), lts_gain(p)); }

/// Role A: [CP, unit, unit, zeros]; role B: [zeros, CP, unit, unit].
inline TimeSignal gen_lts(NodeRole role, const OfdmParams& p) {
  if (role == NodeRole::Relay) throw ConfigError("gen_lts: the relay has no uplink LTS slot");
  const TimeSignal u = lts_unit(p);
  Samples slot;
  slot.reserve(p.lts_slot_len());
  slot.insert(slot.end(), u.samples.end() - static_cast<long>(p.cp_len), u.samples.end());
  slot.insert(slot.end(), u.samples.begin(), u.samples.end());
  slot.insert(slot.end(), u.samples.begin(), u.samples.end());
  Samples out(p.lts_len());
  const std::size_t at = role == NodeRole::A ? 0 : p.lts_slot_len();
  std::copy(slot.begin(), slot.end(), out.begin() + static_cast<long>(at));
  return TimeSignal(std::move(out));
}

/// Pilot map over all four pilot tones; the other node's tones are nulled.
inline std::map<int, Complex> gen_pilots(NodeRole role, int /*symbol_index*/, const OfdmParams& p = {}) {
  const NodeRole owner = role == NodeRole::B ? NodeRole::B : NodeRole::A;
  const NodeRole other = owner == NodeRole::A ? NodeRole::B : NodeRole::A;
  std::map<int, Complex> out;
  for (int k : p.pilots(owner)) out[k] = 1.0;
  for (int k : p.pilots(other)) out[k] = 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Frame assembly
// ---------------------------------------------------------------------------

struct SampleSpan {
  std::size_t begin = 0;
  std::size_t length = 0;
  std::size_t end() const { return begin + length; }
};

struct DataSymbolSpan {
  SampleSpan cp;
  SampleSpan payload;
};

struct FrameLayout {
  SampleSpan sts_span;
  SampleSpan lts_span_A;
  SampleSpan lts_span_B;
  std::vector<DataSymbolSpan> data_symbol_spans;
  std::size_t total_len = 0;
  std::size_t source_bits = 0;
  /// Bits carried on the data tones before padding (coded or raw).
  std::size_t channel_bits = 0;
  std::size_t pad_bits = 0;
  bool coded = true;

  std::size_t n_symbols() const { return data_symbol_spans.size(); }
  /// Offset of the first LTS unit (after its CP) of the given slot.
  std::size_t lts_unit_offset(NodeRole role, const OfdmParams& p) const {
    return (role == NodeRole::B ? lts_span_B.begin : lts_span_A.begin) + p.cp_len;
  }
};

inline FrameLayout make_layout(std::size_t source_bits, const OfdmParams& p) {
  FrameLayout L;
  L.coded = p.coded;
  L.source_bits = source_bits;
  L.channel_bits = p.coded ? coded_length(source_bits) : source_bits;
  const std::size_t per_sym = p.n_data_subcarriers;
  const std::size_t n_sym = (L.channel_bits + per_sym - 1) / per_sym;
  L.pad_bits = n_sym * per_sym - L.channel_bits;
  L.sts_span = {0, p.sts_len()};
  L.lts_span_A = {p.sts_len(), p.lts_slot_len()};
  L.lts_span_B = {p.sts_len() + p.lts_slot_len(), p.lts_slot_len()};
  std::size_t at = p.preamble_len();
  for (std::size_t m = 0; m < n_sym; ++m) {
    L.data_symbol_spans.push_back({{at, p.cp_len}, {at + p.cp_len, p.n_fft}});
    at += p.symbol_len();
  }
  L.total_len = at;
  return L;
}

/// Frequency-domain content of data symbol m: BPSK on the data tones, the
/// role's pilots, nulls elsewhere.
inline Spectrum data_symbol_spectrum(NodeRole role, std::span<const double> symbols, int m, const OfdmParams& p) {
  if (symbols.size() != p.n_data_subcarriers) throw ConfigError("data_symbol_spectrum: wrong symbol count");
  Spectrum X(Samples(p.n_fft));
  const auto tones = p.data_subcarriers();
  for (std::size_t i = 0; i < tones.size(); ++i) X[p.bin(tones[i])] = symbols[i];
  for (auto [k, v] : gen_pilots(role, m, p)) X[p.bin(k)] = v;
  return X;
}

/// Channel bits of a payload: the codeword, or the raw bits in uncoded mode.
inline BitVector channel_bits(const BitVector& payload, const OfdmParams& p) {
  return p.coded ? conv_encode(payload) : BitVector(payload.bits, BitRole::Coded);
}

/// STS || LTS(role) || data symbols. The relay transmits in role A's slot.
inline std::pair<TimeSignal, FrameLayout> build_frame(NodeRole role, const BitVector& payload, const OfdmParams& p) {
  if (payload.empty()) throw ConfigError("build_frame: empty payload");
  p.validate();
  const NodeRole slot = role == NodeRole::B ? NodeRole::B : NodeRole::A;
  FrameLayout L = make_layout(payload.size(), p);
  BitVector bits = channel_bits(payload, p);
  bits.bits.resize(bits.size() + L.pad_bits, 0);
  const std::vector<double> sym = bpsk_map(bits);

  Samples out;
  out.reserve(L.total_len);
  const TimeSignal sts = gen_sts(p);
  const TimeSignal lts = gen_lts(slot, p);
  out.insert(out.end(), sts.samples.begin(), sts.samples.end());
  out.insert(out.end(), lts.samples.begin(), lts.samples.end());
  const double g = data_gain(p);
  for (std::size_t m = 0; m < L.n_symbols(); ++m) {
    std::span<const double> chunk(sym.data() + m * p.n_data_subcarriers, p.n_data_subcarriers);
    const TimeSignal x = scaled_idft(data_symbol_spectrum(slot, chunk, static_cast<int>(m), p), g);
    out.insert(out.end(), x.samples.end() - static_cast<long>(p.cp_len), x.samples.end());
    out.insert(out.end(), x.samples.begin(), x.samples.end());
  }
  return {TimeSignal(std::move(out)), std::move(L)};
}

}  // namespace fpnc
