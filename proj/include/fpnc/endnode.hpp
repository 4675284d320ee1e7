#pragma once

// Point-to-point receiver (single-user frames in the A/relay slot) and
// end-node partner extraction.

#include <optional>
#include <string>

#include "fpnc/codec.hpp"
#include "fpnc/ofdm.hpp"
#include "fpnc/relay.hpp"

namespace fpnc {

struct P2pOptions {
  SyncParams sync;
  CfoEstimator estimator = CfoEstimator::Median;
  CfoOutliers outliers;
  std::optional<long> genie_boundary;
};

struct P2pReceiverOutput {
  BitVector decoded_bits;
  bool sync_ok = false;
  SyncResult sync;
  double phi_hat = 0.0;
  ChannelEstimate channel;
};

inline P2pReceiverOutput p2p_receive(const TimeSignal& y, const FrameLayout& layout, const OfdmParams& p = {},
                                     const P2pOptions& opt = {}) {
  P2pReceiverOutput out;
  if (opt.genie_boundary) {
    out.sync.ok = true;
    out.sync.lts_boundary_A = out.sync.lts_boundary_B = *opt.genie_boundary;
  } else {
    out.sync = sts_sync(y, sts_unit(p), p, opt.sync, false);
  }
  if (!out.sync.ok) return out;
  out.sync_ok = true;

  const long N = static_cast<long>(p.n_fft);
  const long a = out.sync.lts_boundary_A;
  const long frame0 = a - static_cast<long>(layout.lts_unit_offset(NodeRole::A, p));
  out.phi_hat = estimate_cfo_one(window(y, a, 2 * p.n_fft), p.n_fft, opt.estimator, opt.outliers);
  const TimeSignal yc = compensate_cfo(y, CfoStrategy::AOnly, CfoEstimate::of(out.phi_hat, out.phi_hat), frame0);

  const long bo = 1;
  out.channel = estimate_channel_one(yc, a - bo, a + N - bo, lts_freq(p), p, NodeRole::A);

  const double g = data_gain(p);
  const auto pilots = gen_pilots(NodeRole::A, 0, p);
  const auto tones = p.data_subcarriers();
  std::vector<std::uint8_t> bits;
  bits.reserve(layout.n_symbols() * p.n_data_subcarriers);
  for (std::size_t m = 0; m < layout.n_symbols(); ++m) {
    const long start = frame0 + static_cast<long>(layout.data_symbol_spans[m].payload.begin) - bo;
    Spectrum Y = dft(window(yc, start, p.n_fft).samples);
    for (auto& v : Y.bins) v /= g;
    const auto H = track_channel(Y, out.channel, pilots, p, static_cast<int>(m));
    for (int k : tones) bits.push_back((Y[p.bin(k)] * std::conj(H.at(k, p))).real() < 0.0 ? 1 : 0);
  }
  bits.resize(layout.channel_bits);
  BitVector channel(std::move(bits), BitRole::Coded);
  out.decoded_bits = layout.coded ? viterbi_decode(channel) : BitVector(channel.bits, BitRole::Source);
  return out;
}

/// Self-information removal: partner = XOR stream ^ own packet.
inline BitVector extract_partner(const BitVector& xor_bits, const BitVector& own_bits) {
  if (xor_bits.size() != own_bits.size())
    throw ConfigError("extract_partner: length mismatch " + std::to_string(xor_bits.size()) + " vs " +
                      std::to_string(own_bits.size()));
  return fpnc::xor_bits(xor_bits, own_bits, BitRole::Source);
}

}  // namespace fpnc
