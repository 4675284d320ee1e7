#include <gtest/gtest.h>

#include <sstream>

#include "fpnc/experiments.hpp"

using namespace fpnc;

namespace {

TEST(Scheme, SlotCounts) {
  EXPECT_EQ(slots(Scheme::FPNC), 2);
  EXPECT_EQ(slots(Scheme::SNC), 3);
  EXPECT_EQ(slots(Scheme::TS), 4);
}

TEST(Throughput, ErrorFree) {
  const Throughputs t = throughput(0, 0, 0);
  EXPECT_DOUBLE_EQ(t.fpnc, 0.5);
  EXPECT_DOUBLE_EQ(t.snc, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(t.ts, 0.25);
  EXPECT_DOUBLE_EQ(t.fpnc / t.ts - 1.0, 1.0);
  EXPECT_DOUBLE_EQ(t.fpnc / t.snc - 1.0, 0.5);
}

TEST(Throughput, Arithmetic) {
  EXPECT_DOUBLE_EQ(throughput(0.1, 0.0, 0.05).fpnc, 0.5 * 0.9 * 0.95);
  const Throughputs dead = throughput(0.0, 0.0, 1.0);
  EXPECT_EQ(dead.fpnc, 0.0);
  EXPECT_EQ(dead.snc, 0.0);
  EXPECT_EQ(dead.ts, 0.0);
}

TEST(Throughput, RejectsOutOfRange) {
  EXPECT_THROW(throughput(-0.1, 0, 0), ConfigError);
  EXPECT_THROW(throughput(0, 1.5, 0), ConfigError);
  EXPECT_THROW(throughput(0, 0, std::nan("")), ConfigError);
}

TEST(Wilson, KnownValues) {
  const Interval a = wilson_interval(5, 10);
  EXPECT_NEAR(a.low, 0.2366, 1e-4);
  EXPECT_NEAR(a.high, 0.7634, 1e-4);
  const Interval b = wilson_interval(0, 10);
  EXPECT_EQ(b.low, 0.0);
  EXPECT_NEAR(b.high, 0.2775, 1e-4);
  const Interval c = wilson_interval(10, 10);
  EXPECT_NEAR(c.low, 0.7225, 1e-4);
  EXPECT_NEAR(c.high, 1.0, 1e-12);
  EXPECT_TRUE(intervals_overlap(a, b));
  EXPECT_FALSE(intervals_overlap(b, c));
}

UplinkScenario two_tap_scenario(std::size_t offset) {
  UplinkScenario s;
  s.taps_A = ChannelTaps({1.0, 0.0, Complex(0.3, -0.2)});
  s.taps_B = ChannelTaps({Complex(0.0, 1.0), 0.4});
  s.offset_B = offset;
  return s;
}

TEST(FpncTrial, NoiselessOffsetEight) {
  Rng rng(1);
  const BitVector a = random_bits(300, rng), b = random_bits(300, rng);
  FpncTrace trace;
  const TrialRecord r = run_fpnc_trial(two_tap_scenario(8), a, b, rng, {}, &trace);
  EXPECT_FALSE(r.uplink_frame_error);
  EXPECT_EQ(r.xor_bit_errors, 0u);
  EXPECT_EQ(r.total_bits, 300u);
  EXPECT_EQ(r.p2p_frame_errors, (std::vector<bool>{false, false}));
  EXPECT_TRUE(trace.a_recovers_b);
  EXPECT_TRUE(trace.b_recovers_a);
}

TEST(FpncTrial, HugeNoiseFails) {
  int errors = 0;
  for (int t = 0; t < 10; ++t) {
    Rng rng(100 + t);
    UplinkScenario s = two_tap_scenario(8);
    s.noise_variance = 1e6;
    const BitVector a = random_bits(300, rng), b = random_bits(300, rng);
    errors += run_fpnc_trial(s, a, b, rng).uplink_frame_error;
  }
  EXPECT_EQ(errors, 10);
}

TEST(FpncTrial, Deterministic) {
  UplinkScenario s = two_tap_scenario(8);
  s.noise_variance = snr_db_to_noise_variance(6.0);
  Rng r1(7), r2(7);
  EXPECT_EQ(run_trial(Scheme::FPNC, s, 300, r1, {}), run_trial(Scheme::FPNC, s, 300, r2, {}));
}

TEST(SncTrial, Noiseless) {
  Rng rng(2);
  const BitVector a = random_bits(300, rng), b = random_bits(300, rng);
  const TrialRecord r = run_snc_trial(two_tap_scenario(8), a, b, rng);
  EXPECT_FALSE(r.uplink_frame_error);
  EXPECT_EQ(r.p2p_frame_errors.size(), 4u);
  for (bool e : r.p2p_frame_errors) EXPECT_FALSE(e);
}

TEST(SncTrial, XorOfDecodesSemantics) {
  Rng rng(3);
  const BitVector a = random_bits(50, rng), b = random_bits(50, rng);
  BitVector wa = a, wb = b;
  wa[10] ^= 1;
  EXPECT_EQ(snc_xor_errors(wa, b, a, b), 1u);
  wb[10] ^= 1;
  EXPECT_EQ(snc_xor_errors(wa, wb, a, b), 0u);
  wb[20] ^= 1;
  EXPECT_EQ(snc_xor_errors(wa, wb, a, b), 1u);
}

TEST(SncTrial, DegenerateAndDeterministic) {
  UplinkScenario s = two_tap_scenario(0);
  s.noise_variance = 1e6;
  Rng rng(4);
  EXPECT_TRUE(run_trial(Scheme::SNC, s, 200, rng, {}).uplink_frame_error);
  s.noise_variance = snr_db_to_noise_variance(5.0);
  Rng r1(9), r2(9);
  EXPECT_EQ(run_trial(Scheme::SNC, s, 200, r1, {}), run_trial(Scheme::SNC, s, 200, r2, {}));
}

TEST(TsTrial, NoiselessDegenerateDeterministic) {
  Rng rng(5);
  const TrialRecord ok = run_trial(Scheme::TS, two_tap_scenario(0), 200, rng, {});
  EXPECT_EQ(ok.p2p_frame_errors, (std::vector<bool>(4, false)));
  EXPECT_EQ(ok.total_bits, 800u);
  UplinkScenario s = two_tap_scenario(0);
  s.noise_variance = 1e6;
  const TrialRecord bad = run_trial(Scheme::TS, s, 200, rng, {});
  EXPECT_TRUE(bad.uplink_frame_error);
  s.noise_variance = 0.3;
  Rng r1(11), r2(11);
  EXPECT_EQ(run_trial(Scheme::TS, s, 200, r1, {}), run_trial(Scheme::TS, s, 200, r2, {}));
}

SweepConfig small_sweep() {
  SweepConfig c;
  c.scenario = two_tap_scenario(0);
  c.snr_db = {2.0, 8.0};
  c.offsets = {8};
  c.trials = 10;
  c.payload_bits = 200;
  c.seed = 42;
  return c;
}

std::string csv_of(const SweepConfig& c) {
  std::ostringstream os;
  write_csv(snr_sweep(c), os);
  return os.str();
}

TEST(Sweep, ByteIdenticalCsv) {
  const SweepConfig c = small_sweep();
  const std::string a = csv_of(c);
  EXPECT_EQ(a, csv_of(c));
  SweepConfig threaded = c;
  threaded.threads = 4;
  EXPECT_EQ(a, csv_of(threaded));
  EXPECT_EQ(a.substr(0, a.find('\n')),
            "scheme,snr_db,offset,trials,fer,fer_ci_low,fer_ci_high,ber,ber_ci_low,ber_ci_high,throughput");
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 7);
}

TEST(Sweep, AggregatesMatchRecount) {
  const SweepSummary s = snr_sweep(small_sweep());
  for (const auto& row : s.rows) {
    std::size_t n = 0, fe = 0, be = 0, bits = 0;
    for (const auto& r : s.records) {
      if (r.scheme != row.scheme || r.snr_db != row.snr_db || r.offset != row.offset) continue;
      ++n;
      be += r.xor_bit_errors;
      bits += r.total_bits;
      if (row.scheme == Scheme::TS)
        fe += std::count(r.p2p_frame_errors.begin(), r.p2p_frame_errors.end(), true);
      else
        fe += r.uplink_frame_error;
      EXPECT_LE(r.xor_bit_errors, r.total_bits);
    }
    EXPECT_EQ(row.trials, n);
    EXPECT_EQ(row.frame_errors, fe);
    EXPECT_EQ(row.bit_errors, be);
    EXPECT_EQ(row.bits, bits);
    EXPECT_GE(row.throughput, 0.0);
    EXPECT_LE(row.throughput, 1.0 / slots(row.scheme) + 1e-15);
    EXPECT_LE(row.fer_ci.low, row.fer);
    EXPECT_GE(row.fer_ci.high, row.fer);
  }
}

TEST(Sweep, FerNonIncreasingInSnr) {
  SweepConfig c = small_sweep();
  c.snr_db = {0.0, 6.0, 12.0};
  c.trials = 30;
  const SweepSummary s = snr_sweep(c);
  for (Scheme sc : c.schemes)
    for (std::size_t i = 0; i + 1 < c.snr_db.size(); ++i) {
      const SweepRow* lo = s.find(sc, c.snr_db[i], 8);
      const SweepRow* hi = s.find(sc, c.snr_db[i + 1], 8);
      ASSERT_TRUE(lo && hi);
      EXPECT_TRUE(hi->fer <= lo->fer || intervals_overlap(hi->fer_ci, lo->fer_ci)) << to_string(sc);
    }
}

TEST(Sweep, ObserverSeesEveryFpncTrial) {
  SweepConfig c = small_sweep();
  c.schemes = {Scheme::FPNC, Scheme::TS};
  std::size_t traces = 0, records = 0;
  snr_sweep(c, [&](const TrialRecord& r, const FpncTrace* t) {
    ++records;
    if (t) {
      EXPECT_EQ(r.scheme, Scheme::FPNC);
      ++traces;
    }
  });
  EXPECT_EQ(records, 40u);
  EXPECT_EQ(traces, 20u);
}

TEST(Sweep, GenieSyncWithinConfidence) {
  SweepConfig c = small_sweep();
  c.schemes = {Scheme::FPNC};
  c.snr_db = {4.0, 8.0};
  c.trials = 60;
  c.trial.downlink = false;
  const SweepSummary real = snr_sweep(c);
  c.trial.genie_sync = true;
  const SweepSummary genie = snr_sweep(c);
  for (double snr : c.snr_db) {
    const SweepRow* a = real.find(Scheme::FPNC, snr, 8);
    const SweepRow* b = genie.find(Scheme::FPNC, snr, 8);
    EXPECT_TRUE(intervals_overlap(a->ber_ci, b->ber_ci)) << snr << " " << a->ber << " " << b->ber;
  }
}

TEST(ValidateSweep, CpViolationRefused) {
  SweepConfig c = small_sweep();
  c.scenario = UplinkScenario{};
  c.offsets = {17};
  try {
    validate_sweep(c);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("exceeds cyclic prefix"), std::string::npos);
  }
  c.offsets = {16};
  EXPECT_THROW(validate_sweep(c), ConfigError);
  c.allow_cp_violation = true;
  EXPECT_NO_THROW(validate_sweep(c));
}

TEST(ValidateSweep, CfoCapAndEmptyLists) {
  SweepConfig c = small_sweep();
  c.scenario.cfo_A.phi = 1.01 * cfo_cap();
  EXPECT_THROW(validate_sweep(c), ConfigError);
  c = small_sweep();
  c.snr_db.clear();
  EXPECT_THROW(validate_sweep(c), ConfigError);
  c = small_sweep();
  c.trials = 0;
  EXPECT_THROW(validate_sweep(c), ConfigError);
}

TEST(TrialRng, DependsOnCoordinatesOnly) {
  EXPECT_EQ(trial_rng(1, Scheme::FPNC, 0, 3).seed(), trial_rng(1, Scheme::FPNC, 0, 3).seed());
  EXPECT_NE(trial_rng(1, Scheme::FPNC, 0, 3).seed(), trial_rng(1, Scheme::FPNC, 0, 4).seed());
  EXPECT_NE(trial_rng(1, Scheme::FPNC, 0, 3).seed(), trial_rng(1, Scheme::SNC, 0, 3).seed());
}

TEST(ParallelFor, PropagatesExceptions) {
  EXPECT_THROW(parallel_for(10, 3, [](std::size_t i) {
                 if (i == 7) throw ConfigError("boom");
               }),
               ConfigError);
}

}  // namespace
