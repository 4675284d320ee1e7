// fpnc_sim: sweep, single-trial and selftest front end.

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "fpnc/config.hpp"
#include "fpnc/diagnostics.hpp"
#include "fpnc/fpnc.hpp"

namespace {

using namespace fpnc;

struct Overrides {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::vector<double> snr;
  std::vector<std::size_t> offsets;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> payload_bits;
  std::string schemes;
  std::string strategy;
  std::string estimator;
  std::string mapping;
  std::string coding;
  bool allow_cp_violation = false;
  bool genie_sync = false;
  std::string output;
  std::string diagnostics;
  std::size_t threads = 0;
};

std::size_t default_threads() {
  if (const char* env = std::getenv("FPNC_THREADS")) return static_cast<std::size_t>(cfg::to_uint(env, "FPNC_THREADS"));
  return std::max(1u, std::thread::hardware_concurrency());
}

SweepConfig resolve(const Overrides& o) {
  SweepConfig c = o.scenario.empty() ? SweepConfig{} : load_scenario(o.scenario);
  if (o.seed) c.seed = *o.seed;
  if (!o.snr.empty()) c.snr_db = o.snr;
  if (!o.offsets.empty()) c.offsets = o.offsets;
  if (o.trials) c.trials = *o.trials;
  if (o.payload_bits) c.payload_bits = *o.payload_bits;
  if (!o.schemes.empty()) apply_setting(c, "schemes", o.schemes);
  if (!o.strategy.empty()) c.trial.strategy = parse_strategy(o.strategy);
  if (!o.estimator.empty()) c.trial.estimator = parse_estimator(o.estimator);
  if (!o.mapping.empty()) c.trial.rule = parse_rule(o.mapping);
  if (!o.coding.empty()) apply_setting(c, "coding", o.coding);
  if (o.allow_cp_violation) c.allow_cp_violation = true;
  if (o.genie_sync) c.trial.genie_sync = true;
  c.threads = o.threads ? o.threads : default_threads();
  validate_sweep(c);
  return c;
}

/// Writes via a temporary file in the same directory, then renames.
void write_atomic(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

void print_table(const SweepSummary& s) {
  std::printf("%-6s %7s %6s %7s %9s %12s %10s\n", "scheme", "snr_db", "offset", "trials", "fer", "ber", "throughput");
  for (const auto& r : s.rows)
    std::printf("%-6s %7.2f %6zu %7zu %9.4f %12.3e %10.4f\n", to_string(r.scheme), r.snr_db, r.offset, r.trials, r.fer,
                r.ber, r.throughput);
}

int run_sweep(const Overrides& o) {
  const SweepConfig c = resolve(o);
  std::ostringstream diag;
  TrialObserver observer;
  if (!o.diagnostics.empty())
    observer = [&](const TrialRecord& rec, const FpncTrace* t) {
      if (t) write_diagnostic(diag, rec, t->relay, c.trial.ofdm);
    };
  const SweepSummary s = snr_sweep(c, observer);
  std::ostringstream csv;
  write_csv(s, csv);
  if (o.output.empty()) {
    std::cout << csv.str();
  } else {
    write_atomic(o.output, csv.str());
    print_table(s);
  }
  if (!o.diagnostics.empty()) write_atomic(o.diagnostics, diag.str());
  return 0;
}

int run_single(const Overrides& o, bool noiseless, const std::string& scheme) {
  SweepConfig c = resolve(o);
  const Scheme s = parse_scheme(scheme);
  UplinkScenario sc = c.scenario;
  sc.offset_B = c.offsets.front();
  sc.noise_variance = noiseless ? 0.0 : snr_db_to_noise_variance(c.snr_db.front());
  Rng rng = trial_rng(c.seed, s, 0, 0);
  FpncTrace trace;
  TrialRecord rec = run_trial(s, sc, c.payload_bits, rng, c.trial, &trace);
  rec.snr_db = c.snr_db.front();

  std::printf("scheme: %s  offset: %zu  snr_db: %s  seed: %llu\n", to_string(s), sc.offset_B,
              noiseless ? "noiseless" : std::to_string(rec.snr_db).c_str(), static_cast<unsigned long long>(c.seed));
  if (s == Scheme::FPNC) {
    const SyncResult& sy = trace.relay.sync;
    if (sy.ok)
      std::printf("sync: %zu peaks, LTS boundary A %ld, detected offset %ld\n", sy.peak_indices.size(),
                  sy.lts_boundary_A, sy.detected_offset);
    else
      std::printf("sync failed: %s\n", sy.failure.c_str());
    std::printf("CFO: phi_A %.6g  phi_B %.6g  phi_tilde %.6g\n", trace.relay.cfo.phi_hat_A, trace.relay.cfo.phi_hat_B,
                trace.relay.cfo.phi_tilde);
  }
  std::printf("XOR bit errors: %zu / %zu\n", rec.xor_bit_errors, rec.total_bits);
  std::printf("XOR frame errors: %d\n", rec.uplink_frame_error ? 1 : 0);
  std::size_t p2p = 0;
  for (bool e : rec.p2p_frame_errors) p2p += e;
  std::printf("P2P frame errors: %zu / %zu\n", p2p, rec.p2p_frame_errors.size());
  if (!o.diagnostics.empty() && s == Scheme::FPNC) {
    std::ostringstream diag;
    write_diagnostic(diag, rec, trace.relay, c.trial.ofdm);
    write_atomic(o.diagnostics, diag.str());
  }
  return 0;
}

int run_selftest(std::uint64_t seed, std::size_t trials) {
  bool ok = true;
  const OfdmParams p;
  Rng root(seed);

  Rng rng = root.derive(1);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    UplinkScenario s;
    const std::size_t off = rng.index(p.cp_len);
    s.taps_A = random_two_tap(rng, p.cp_len);
    s.taps_B = random_two_tap(rng, p.cp_len - off);
    s.offset_B = off;
    worst = std::max(worst, alignment_residual(s, p, rng, 1));
  }
  const bool conv_ok = worst <= 1e-6;
  std::printf("%s  convolution theorem, 50 scenarios within CP: max residual %.2e\n", conv_ok ? "PASS" : "FAIL", worst);
  ok &= conv_ok;

  UplinkScenario past;
  past.offset_B = p.cp_len;
  Rng r2 = root.derive(2);
  const double neg = alignment_residual(past, p, r2, 1);
  const bool neg_ok = neg > 1e-3;
  std::printf("%s  delay spread one past CP breaks alignment: residual %.2e\n", neg_ok ? "PASS" : "FAIL", neg);
  ok &= neg_ok;

  for (std::size_t off : {0u, 4u, 8u, 15u, 16u}) {
    Rng r = root.derive(3, off);
    std::size_t good = 0;
    for (std::size_t t = 0; t < trials; ++t) good += noiseless_exchange(off, r);
    const bool pass = good == trials;
    std::printf("%s  noiseless exchange, offset %2zu: %zu/%zu\n", pass ? "PASS" : "FAIL", off, good, trials);
    ok &= pass;
  }
  return ok ? 0 : 2;
}

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--scenario", o.scenario, "key = value scenario file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "root seed");
  cmd->add_option("--offset", o.offsets, "B's arrival offset(s) in samples")->delimiter(',');
  cmd->add_option("--snr", o.snr, "SNR point(s) in dB")->delimiter(',');
  cmd->add_option("--trials", o.trials, "trials per point");
  cmd->add_option("--payload-bits", o.payload_bits, "source bits per packet");
  cmd->add_option("--schemes", o.schemes, "comma list of fpnc, snc, ts");
  cmd->add_option("--cfo-strategy", o.strategy, "mean, A_only or B_only");
  cmd->add_option("--cfo-estimator", o.estimator, "median or mean");
  cmd->add_option("--mapping", o.mapping, "logmax or exact");
  cmd->add_option("--coding", o.coding, "coded or uncoded");
  cmd->add_flag("--allow-cp-violation", o.allow_cp_violation, "run delay spreads beyond the CP");
  cmd->add_flag("--genie-sync", o.genie_sync, "bypass timing acquisition");
  cmd->add_option("--diagnostics", o.diagnostics, "JSON-lines dump of relay internals");
  cmd->add_option("--threads", o.threads, "worker threads (default: $FPNC_THREADS or all cores)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency-domain physical-layer network coding link simulator"};
  app.require_subcommand(1);
  Overrides sweep_o, single_o;
  bool noiseless = false;
  std::string scheme = "fpnc";
  std::uint64_t self_seed = 1;
  std::size_t self_trials = 20;

  auto* sweep = app.add_subcommand("sweep", "SNR sweep, CSV to --output or stdout");
  add_common(sweep, sweep_o);
  sweep->add_option("--output,-o", sweep_o.output, "CSV path (written atomically)");

  auto* single = app.add_subcommand("single-trial", "one exchange with a readable report");
  add_common(single, single_o);
  single->add_flag("--noiseless", noiseless, "sigma^2 = 0");
  single->add_option("--scheme", scheme, "fpnc, snc or ts");

  auto* self = app.add_subcommand("selftest", "noiseless exchange suite and convolution-theorem checks");
  self->add_option("--seed", self_seed);
  self->add_option("--trials", self_trials, "exchanges per offset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "fpnc_sim: " << e.what() << '\n';
    return 1;
  }

  try {
    if (*sweep) return run_sweep(sweep_o);
    if (*single) return run_single(single_o, noiseless, scheme);
    return run_selftest(self_seed, self_trials);
  } catch (const ConfigError& e) {
    std::cerr << "fpnc_sim: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "fpnc_sim: " << e.what() << '\n';
    return 2;
  }
}
