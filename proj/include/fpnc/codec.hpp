#pragma once

// Bit containers, the K=7 rate-1/2 convolutional code (133/171 octal,
// zero-tail) with a hard-decision Viterbi decoder, and BPSK mapping.

#include <array>
#include <bit>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "fpnc/signal.hpp"

namespace fpnc {

enum class BitRole { Source, Coded, Xor };

struct BitVector {
  std::vector<std::uint8_t> bits;
  BitRole role = BitRole::Source;

  BitVector() = default;
  explicit BitVector(std::vector<std::uint8_t> b, BitRole r = BitRole::Source) : bits(std::move(b)), role(r) {}

  std::size_t size() const { return bits.size(); }
  bool empty() const { return bits.empty(); }
  std::uint8_t operator[](std::size_t i) const { return bits[i]; }
  std::uint8_t& operator[](std::size_t i) { return bits[i]; }
  bool operator==(const BitVector& o) const { return bits == o.bits; }
};

inline BitVector random_bits(std::size_t n, Rng& rng, BitRole role = BitRole::Source) {
  std::vector<std::uint8_t> b(n);
  for (auto& v : b) v = rng.bit();
  return BitVector(std::move(b), role);
}

inline BitVector xor_bits(const BitVector& a, const BitVector& b, BitRole role = BitRole::Xor) {
  if (a.size() != b.size())
    throw ConfigError("xor_bits: length mismatch " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  std::vector<std::uint8_t> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] ^ b[i];
  return BitVector(std::move(out), role);
}

inline std::size_t hamming_distance(const BitVector& a, const BitVector& b) {
  if (a.size() != b.size()) throw ConfigError("hamming_distance: length mismatch");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] != b[i]);
  return d;
}

// ---------------------------------------------------------------------------
// Convolutional code
// ---------------------------------------------------------------------------

inline constexpr int kConstraintLength = 7;
inline constexpr int kTailBits = kConstraintLength - 1;
inline constexpr unsigned kG0 = 0133;
inline constexpr unsigned kG1 = 0171;
inline constexpr int kNumStates = 1 << kTailBits;

inline std::size_t coded_length(std::size_t source_bits) { return 2 * (source_bits + kTailBits); }

namespace detail {

// Register layout: bit 6 holds the newest input, bit 0 the oldest, so the
// octal generators read left to right as delays 0..6.
inline std::uint8_t parity(unsigned v) { return static_cast<std::uint8_t>(std::popcount(v) & 1); }

struct Branch {
  std::uint8_t out0, out1;
  std::uint8_t next;
};

inline const std::array<std::array<Branch, 2>, kNumStates>& trellis() {
  static const auto table = [] {
    std::array<std::array<Branch, 2>, kNumStates> t{};
    for (unsigned s = 0; s < kNumStates; ++s)
      for (unsigned u = 0; u < 2; ++u) {
        const unsigned reg = (u << kTailBits) | s;
        t[s][u] = {parity(reg & kG0), parity(reg & kG1), static_cast<std::uint8_t>(reg >> 1)};
      }
    return t;
  }();
  return table;
}

}  // namespace detail

/// Rate-1/2 encoding terminated with six zero tail bits.
inline BitVector conv_encode(const BitVector& src) {
  const auto& t = detail::trellis();
  std::vector<std::uint8_t> out;
  out.reserve(coded_length(src.size()));
  unsigned state = 0;
  auto push = [&](unsigned u) {
    const auto& b = t[state][u & 1u];
    out.push_back(b.out0);
    out.push_back(b.out1);
    state = b.next;
  };
  for (auto u : src.bits) push(u);
  for (int i = 0; i < kTailBits; ++i) push(0);
  return BitVector(std::move(out), BitRole::Coded);
}

/// Hard-decision Viterbi decoding of a zero-tail codeword (Hamming metric).
inline BitVector viterbi_decode(const BitVector& coded) {
  if (coded.size() % 2 != 0 || coded.size() < coded_length(0))
    throw ConfigError("viterbi_decode: coded length " + std::to_string(coded.size()) +
                      " is not 2*(n+6) for a terminated rate-1/2 trellis");
  const std::size_t steps = coded.size() / 2;
  const std::size_t n_src = steps - kTailBits;
  const auto& t = detail::trellis();
  constexpr unsigned kInf = std::numeric_limits<unsigned>::max() / 2;

  std::array<unsigned, kNumStates> metric;
  metric.fill(kInf);
  metric[0] = 0;
  // survivor[step][next_state] = previous state
  std::vector<std::array<std::uint8_t, kNumStates>> survivor(steps);

  for (std::size_t i = 0; i < steps; ++i) {
    const std::uint8_t r0 = coded[2 * i], r1 = coded[2 * i + 1];
    std::array<unsigned, kNumStates> next;
    next.fill(kInf);
    const unsigned u_max = i < n_src ? 2u : 1u;
    for (unsigned s = 0; s < kNumStates; ++s) {
      if (metric[s] >= kInf) continue;
      for (unsigned u = 0; u < u_max; ++u) {
        const auto& b = t[s][u];
        const unsigned m = metric[s] + (b.out0 != r0) + (b.out1 != r1);
        if (m < next[b.next]) {
          next[b.next] = m;
          survivor[i][b.next] = static_cast<std::uint8_t>(s);
        }
      }
    }
    metric = next;
  }

  std::vector<std::uint8_t> decoded(steps);
  unsigned state = 0;
  for (std::size_t i = steps; i-- > 0;) {
    decoded[i] = static_cast<std::uint8_t>((state >> (kTailBits - 1)) & 1u);
    state = survivor[i][state];
  }
  decoded.resize(n_src);
  return BitVector(std::move(decoded), BitRole::Source);
}

/// 0 -> +1, 1 -> -1.
inline std::vector<double> bpsk_map(const BitVector& bits) {
  std::vector<double> out(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) out[i] = bits[i] ? -1.0 : 1.0;
  return out;
}

}  // namespace fpnc
