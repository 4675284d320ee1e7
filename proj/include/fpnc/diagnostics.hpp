#pragma once

// Line-delimited JSON records of the relay's per-frame internals.

#include <ostream>

#include <json.hpp>

#include "fpnc/experiments.hpp"

namespace fpnc {

inline nlohmann::json to_json(const ChannelEstimate& h, const OfdmParams& p) {
  nlohmann::json out = nlohmann::json::array();
  for (int k : p.occupied_band) {
    const Complex v = h.at(k, p);
    out.push_back({k, v.real(), v.imag()});
  }
  return out;
}

inline nlohmann::json diagnostic_record(const TrialRecord& rec, const RelayOutput& relay, const OfdmParams& p) {
  nlohmann::json j;
  j["scheme"] = to_string(rec.scheme);
  j["snr_db"] = rec.snr_db;
  j["offset"] = rec.offset;
  j["seed"] = rec.seed;
  j["sync_ok"] = relay.sync.ok;
  j["peaks"] = relay.sync.peak_indices;
  j["lts_boundary_A"] = relay.sync.lts_boundary_A;
  j["lts_boundary_B"] = relay.sync.lts_boundary_B;
  j["detected_offset"] = relay.sync.detected_offset;
  j["phi_hat_A"] = relay.cfo.phi_hat_A;
  j["phi_hat_B"] = relay.cfo.phi_hat_B;
  j["phi_tilde"] = relay.cfo.phi_tilde;
  if (relay.ok) {
    j["H_A"] = to_json(relay.H_A, p);
    j["H_B"] = to_json(relay.H_B, p);
  }
  j["xor_bit_errors"] = rec.xor_bit_errors;
  j["total_bits"] = rec.total_bits;
  return j;
}

inline void write_diagnostic(std::ostream& os, const TrialRecord& rec, const RelayOutput& relay, const OfdmParams& p) {
  os << diagnostic_record(rec, relay, p).dump() << '\n';
}

}  // namespace fpnc
