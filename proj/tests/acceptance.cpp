// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cstdio>
#include <sstream>
#include <string>

#include "fpnc/config.hpp"
#include "fpnc/fpnc.hpp"

using namespace fpnc;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool overlap(const Interval& a, const Interval& b) { return a.low <= b.high && b.low <= a.high; }

SweepConfig shipped(const char* name) {
  SweepConfig c = load_scenario(std::string(FPNC_CONFIGS) + "/" + name);
  c.threads = 1;
  return c;
}

Outcome alignment() {
  const OfdmParams p;
  Rng rng(101);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    UplinkScenario s;
    const std::size_t off = rng.index(p.cp_len);
    s.taps_A = random_two_tap(rng, p.cp_len);
    s.taps_B = random_two_tap(rng, p.cp_len - off);
    s.offset_B = off;
    if (delay_spread(s) > p.cp_len) return {false, "scenario generator exceeded the CP"};
    worst = std::max(worst, alignment_residual(s, p, rng, static_cast<std::size_t>(t) % 3, 1));
  }
  double least = 1e300;
  for (int t = 0; t < 10; ++t) {
    UplinkScenario s;
    s.taps_A = random_two_tap(rng, p.cp_len);
    const std::size_t off = rng.index(p.cp_len + 1);
    s.taps_B = off == p.cp_len ? ChannelTaps({rng.complex_gaussian(1.0)}) : random_two_tap(rng, p.cp_len - off + 1);
    if (off < p.cp_len) {
      Samples t2 = s.taps_B.taps;
      t2.resize(p.cp_len - off + 1);
      t2.back() = std::polar(0.3, 2.0 * std::numbers::pi * rng.uniform());
      s.taps_B = ChannelTaps(t2);
    }
    s.offset_B = off;
    if (delay_spread(s) != p.cp_len + 1) return {false, "negative control is not one past the CP"};
    least = std::min(least, alignment_residual(s, p, rng, 0, 1));
  }
  return {worst <= 1e-6 && least > 1e-3,
          fmt("within CP max residual %.2e (<= 1e-6); one past CP min residual %.2e (> 1e-3)", worst, least)};
}

Outcome noiseless() {
  Outcome o;
  Rng root(202);
  for (std::size_t off : {0u, 4u, 8u, 15u, 16u}) {
    Rng r = root.derive(off);
    std::size_t good = 0;
    for (int t = 0; t < 100; ++t) good += noiseless_exchange(off, r);
    o.pass &= good == 100;
    o.detail += fmt("offset %zu: %zu/100  ", off, good);
  }
  return o;
}

Outcome sync_vs_async() {
  Outcome o;
  for (bool coded : {true, false}) {
    SweepConfig c = shipped("async8.cfg");
    c.schemes = {Scheme::FPNC};
    c.offsets = {0, 8};
    c.snr_db = {6.0, 9.0, 12.0, 15.0};
    c.trials = 1000;
    c.seed = 303;
    c.trial.downlink = false;
    c.trial.ofdm.coded = coded;
    const SweepSummary s = snr_sweep(c);
    std::size_t ok = 0;
    std::string worst;
    for (double snr : c.snr_db) {
      const SweepRow* r0 = s.find(Scheme::FPNC, snr, 0);
      const SweepRow* r8 = s.find(Scheme::FPNC, snr, 8);
      if (overlap(r0->ber_ci, r8->ber_ci)) {
        ++ok;
      } else {
        worst += fmt(" %g dB [%.2e,%.2e] vs [%.2e,%.2e];", snr, r0->ber_ci.low, r0->ber_ci.high, r8->ber_ci.low,
                     r8->ber_ci.high);
      }
    }
    o.pass &= ok == c.snr_db.size();
    o.detail += fmt("%s %zu/4 overlap%s  ", coded ? "coded" : "uncoded", ok, worst.c_str());
  }
  return o;
}

Outcome throughput() {
  SweepConfig c = shipped("async8.cfg");
  c.snr_db = {6.0, 9.0, 12.0, 15.0, 20.0, 25.0};
  c.trials = 1000;
  c.seed = 404;
  const SweepSummary s = snr_sweep(c);
  auto row = [&](Scheme k, double snr) { return s.find(k, snr, 8); };

  std::optional<double> clean;
  for (double snr : c.snr_db) {
    bool all = true;
    for (Scheme k : {Scheme::FPNC, Scheme::SNC, Scheme::TS}) all &= row(k, snr)->fer < 0.01 && row(k, snr)->p2p_fer < 0.01;
    if (all) clean = snr;
  }
  if (!clean) return {false, "no SNR point with every FER below 1%"};
  const double tf = row(Scheme::FPNC, *clean)->throughput;
  const double g_ts = tf / row(Scheme::TS, *clean)->throughput - 1.0;
  const double g_snc = tf / row(Scheme::SNC, *clean)->throughput - 1.0;
  const bool asym = std::abs(g_ts - 1.0) <= 0.05 && std::abs(g_snc - 0.5) <= 0.05;

  std::optional<double> cross;
  for (double snr : c.snr_db) {
    if (snr >= *clean) break;
    const double f = row(Scheme::FPNC, snr)->throughput, n = row(Scheme::SNC, snr)->throughput,
                 t = row(Scheme::TS, snr)->throughput;
    if (n > 0.01 && t > 0.01 && f < n && f < t) {
      cross = snr;
      break;
    }
  }
  return {asym && cross.has_value(),
          fmt("at %g dB gain over TS %.1f%%, over SNC %.1f%%; FPNC below SNC and TS at %s", *clean, 100.0 * g_ts,
              100.0 * g_snc, cross ? fmt("%g dB", *cross).c_str() : "no point")};
}

Outcome cfo_ordering() {
  Outcome o;
  SweepConfig c = shipped("async8.cfg");
  c.schemes = {Scheme::FPNC};
  c.offsets = {8};
  c.snr_db = {9.0, 12.0, 15.0, 18.0, 21.0};
  c.trials = 1000;
  c.seed = 505;
  c.trial.downlink = false;
  c.scenario.cfo_A.phi = 0.008;
  c.scenario.cfo_B.phi = -0.008;
  auto run = [&](CfoStrategy st, CfoEstimator est, const CfoOutliers& out) {
    SweepConfig k = c;
    k.trial.strategy = st;
    k.trial.estimator = est;
    k.trial.outliers = out;
    return snr_sweep(k);
  };
  const SweepSummary mean = run(CfoStrategy::Mean, CfoEstimator::Median, {});
  for (CfoStrategy single : {CfoStrategy::AOnly, CfoStrategy::BOnly}) {
    const SweepSummary one = run(single, CfoEstimator::Median, {});
    std::size_t le = 0, resolved = 0;
    for (double snr : c.snr_db) {
      const SweepRow* m = mean.find(Scheme::FPNC, snr, 8);
      const SweepRow* s = one.find(Scheme::FPNC, snr, 8);
      le += m->ber <= s->ber;
      resolved += m->ber_ci.high < s->ber_ci.low;
    }
    o.pass &= le == c.snr_db.size() && resolved >= 2;
    o.detail += fmt("mean vs %s: <= at %zu/5, resolved at %zu  ", single == CfoStrategy::AOnly ? "A_only" : "B_only",
                    le, resolved);
  }

  CfoOutliers outliers;
  outliers.count = 8;
  outliers.angle = 2.5;
  c.snr_db = {9.0, 12.0, 15.0, 18.0};
  c.scenario.cfo_A.phi = 0.003;
  c.scenario.cfo_B.phi = -0.002;
  const SweepSummary med = run(CfoStrategy::Mean, CfoEstimator::Median, outliers);
  const SweepSummary avg = run(CfoStrategy::Mean, CfoEstimator::Mean, outliers);
  std::size_t le = 0, resolved = 0;
  for (double snr : c.snr_db) {
    const SweepRow* m = med.find(Scheme::FPNC, snr, 8);
    const SweepRow* a = avg.find(Scheme::FPNC, snr, 8);
    le += m->ber <= a->ber;
    resolved += m->ber_ci.high < a->ber_ci.low;
  }
  o.pass &= le == c.snr_db.size() && resolved >= 1;
  o.detail += fmt("median vs mean with outliers: <= at %zu/4, resolved at %zu", le, resolved);
  return o;
}

BitVector from_int(unsigned v, std::size_t n) {
  std::vector<std::uint8_t> b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = (v >> i) & 1u;
  return BitVector(b);
}

Outcome oracles() {
  Outcome o;
  Rng rng(606);

  double dft_err = 0.0;
  for (std::size_t n : {2u, 8u, 64u, 256u}) {
    for (int t = 0; t < 20; ++t) {
      Samples x(n);
      for (auto& v : x) v = rng.complex_gaussian(1.0);
      const Spectrum X = dft(x);
      for (std::size_t k = 0; k < n; ++k) {
        Complex acc{};
        for (std::size_t i = 0; i < n; ++i)
          acc += x[i] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>((i * k) % n) / static_cast<double>(n));
        dft_err = std::max(dft_err, std::abs(X[k] - acc));
      }
    }
  }
  o.pass &= dft_err <= 1e-9;

  std::vector<BitVector> book;
  for (unsigned v = 0; v < 256; ++v) book.push_back(conv_encode(from_int(v, 8)));
  std::size_t ml_bad = 0;
  for (int t = 0; t < 2000; ++t) {
    const BitVector r = random_bits(coded_length(8), rng, BitRole::Coded);
    std::size_t best = SIZE_MAX;
    for (const auto& c : book) best = std::min(best, hamming_distance(c, r));
    ml_bad += hamming_distance(conv_encode(viterbi_decode(r)), r) != best;
  }
  o.pass &= ml_bad == 0;

  std::size_t map_bad = 0;
  for (int t = 0; t < 100000; ++t) {
    const Complex hA = rng.complex_gaussian(1.0), hB = rng.complex_gaussian(1.0), Y = rng.complex_gaussian(3.0);
    const double same = std::min(std::norm(Y - hA - hB), std::norm(Y + hA + hB));
    const double mixed = std::min(std::norm(Y - hA + hB), std::norm(Y + hA - hB));
    map_bad += logmax_xor(Y, hA, hB) != (same <= mixed ? 1 : -1);
  }
  o.pass &= map_bad == 0;

  std::size_t lin_bad = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng.index(300);
    const BitVector a = random_bits(n, rng), b = random_bits(n, rng);
    lin_bad += conv_encode(xor_bits(a, b, BitRole::Source)) !=
               xor_bits(conv_encode(a), conv_encode(b), BitRole::Coded);
  }
  o.pass &= lin_bad == 0;

  o.detail = fmt("DFT max error %.1e; Viterbi non-ML decisions %zu/2000; mapping mismatches %zu/100000; "
                 "linearity failures %zu/1000",
                 dft_err, ml_bad, map_bad, lin_bad);
  return o;
}

Outcome determinism() {
  SweepConfig c = shipped("async8.cfg");
  c.snr_db = {10.0, 20.0};
  c.offsets = {0, 8};
  c.trials = 40;
  c.seed = 707;
  auto csv = [&](std::size_t threads) {
    SweepConfig k = c;
    k.threads = threads;
    std::ostringstream os;
    write_csv(snr_sweep(k), os);
    return os.str();
  };
  const std::string a = csv(1), b = csv(1), d = csv(4);
  return {a == b && a == d && !a.empty(), fmt("%zu-byte CSV, re-run %s, 4 threads %s", a.size(),
                                             a == b ? "identical" : "differs", a == d ? "identical" : "differs")};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion all[] = {
      {"1 frequency-domain alignment", alignment},
      {"2 noiseless exchange", noiseless},
      {"3 sync vs async BER", sync_vs_async},
      {"4 throughput gains and crossover", throughput},
      {"5 CFO strategy and estimator ordering", cfo_ordering},
      {"6 oracle equivalences", oracles},
      {"7 determinism", determinism},
  };
  int failed = 0;
  for (const auto& c : all) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::printf("%s  %s (%.0f s): %s\n", o.pass ? "PASS" : "FAIL", c.name, secs, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}
