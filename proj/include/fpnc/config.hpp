#pragma once

// key = value scenario files. Complex tap lists are comma-separated
// "re im" pairs, e.g. `taps_A = 1 0, 0.3 -0.2`. '#' starts a comment.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "fpnc/experiments.hpp"

namespace fpnc {

namespace cfg {

inline std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double to_double(const std::string& s, const std::string& key) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e) throw ConfigError(key + ": not a number: '" + s + "'");
  return v;
}

inline std::uint64_t to_uint(const std::string& s, const std::string& key) {
  std::uint64_t v = 0;
  const char* b = s.data();
  const char* e = b + s.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e) throw ConfigError(key + ": not a non-negative integer: '" + s + "'");
  return v;
}

inline bool to_bool(const std::string& s, const std::string& key) {
  const std::string v = lower(s);
  if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
  if (v == "false" || v == "no" || v == "0" || v == "off") return false;
  throw ConfigError(key + ": expected true/false, got '" + s + "'");
}

}  // namespace cfg

inline Scheme parse_scheme(const std::string& s) {
  const std::string v = cfg::lower(s);
  if (v == "fpnc") return Scheme::FPNC;
  if (v == "snc") return Scheme::SNC;
  if (v == "ts") return Scheme::TS;
  throw ConfigError("unknown scheme '" + s + "' (fpnc, snc, ts)");
}

inline CfoStrategy parse_strategy(const std::string& s) {
  const std::string v = cfg::lower(s);
  if (v == "mean") return CfoStrategy::Mean;
  if (v == "a_only" || v == "a") return CfoStrategy::AOnly;
  if (v == "b_only" || v == "b") return CfoStrategy::BOnly;
  throw ConfigError("unknown CFO strategy '" + s + "' (mean, A_only, B_only)");
}

inline CfoEstimator parse_estimator(const std::string& s) {
  const std::string v = cfg::lower(s);
  if (v == "median") return CfoEstimator::Median;
  if (v == "mean") return CfoEstimator::Mean;
  throw ConfigError("unknown CFO estimator '" + s + "' (mean, median)");
}

inline MappingRule parse_rule(const std::string& s) {
  const std::string v = cfg::lower(s);
  if (v == "logmax") return MappingRule::LogMax;
  if (v == "exact") return MappingRule::Exact;
  throw ConfigError("unknown mapping rule '" + s + "' (logmax, exact)");
}

inline Samples parse_taps(const std::string& s, const std::string& key) {
  Samples taps;
  for (const auto& pair : cfg::split(s, ',')) {
    std::istringstream is(pair);
    std::string re, im, extra;
    is >> re >> im;
    if (re.empty() || (is >> extra)) throw ConfigError(key + ": expected 're im' pairs, got '" + pair + "'");
    taps.emplace_back(cfg::to_double(re, key), im.empty() ? 0.0 : cfg::to_double(im, key));
  }
  if (taps.empty()) throw ConfigError(key + ": empty tap list");
  return taps;
}

inline std::vector<double> parse_doubles(const std::string& s, const std::string& key) {
  std::vector<double> out;
  for (const auto& v : cfg::split(s, ',')) out.push_back(cfg::to_double(v, key));
  return out;
}

inline std::vector<std::size_t> parse_sizes(const std::string& s, const std::string& key) {
  std::vector<std::size_t> out;
  for (const auto& v : cfg::split(s, ',')) out.push_back(static_cast<std::size_t>(cfg::to_uint(v, key)));
  return out;
}

inline void apply_setting(SweepConfig& c, const std::string& key, const std::string& value) {
  const std::string k = cfg::lower(key);
  TrialOptions& t = c.trial;
  if (k == "taps_a") c.scenario.taps_A.taps = parse_taps(value, key);
  else if (k == "taps_a_first") c.scenario.taps_A.first_index = cfg::to_uint(value, key);
  else if (k == "taps_b") c.scenario.taps_B.taps = parse_taps(value, key);
  else if (k == "taps_b_first") c.scenario.taps_B.first_index = cfg::to_uint(value, key);
  else if (k == "offset" || k == "offsets") c.offsets = parse_sizes(value, key);
  else if (k == "cfo_a") c.scenario.cfo_A.phi = cfg::to_double(value, key);
  else if (k == "cfo_b") c.scenario.cfo_B.phi = cfg::to_double(value, key);
  else if (k == "snr_db") c.snr_db = parse_doubles(value, key);
  else if (k == "trials") c.trials = cfg::to_uint(value, key);
  else if (k == "seed") c.seed = cfg::to_uint(value, key);
  else if (k == "payload_bits") c.payload_bits = cfg::to_uint(value, key);
  else if (k == "payload_bytes") c.payload_bits = 8 * cfg::to_uint(value, key);
  else if (k == "schemes") {
    c.schemes.clear();
    for (const auto& s : cfg::split(value, ',')) c.schemes.push_back(parse_scheme(s));
  } else if (k == "coding") {
    const std::string v = cfg::lower(value);
    if (v != "coded" && v != "uncoded") throw ConfigError(key + ": expected coded or uncoded");
    t.ofdm.coded = v == "coded";
  } else if (k == "cfo_strategy") t.strategy = parse_strategy(value);
  else if (k == "cfo_estimator") t.estimator = parse_estimator(value);
  else if (k == "mapping") t.rule = parse_rule(value);
  else if (k == "random_phase") t.random_phase = cfg::to_bool(value, key);
  else if (k == "genie_sync") t.genie_sync = cfg::to_bool(value, key);
  else if (k == "downlink") t.downlink = cfg::to_bool(value, key);
  else if (k == "outlier_count") t.outliers.count = cfg::to_uint(value, key);
  else if (k == "outlier_angle") t.outliers.angle = cfg::to_double(value, key);
  else if (k == "sync_threshold") t.sync.threshold = cfg::to_double(value, key);
  else if (k == "cp_len") t.ofdm.cp_len = cfg::to_uint(value, key);
  else if (k == "allow_cp_violation") c.allow_cp_violation = cfg::to_bool(value, key);
  else throw ConfigError("unknown key '" + key + "'");
}

inline void parse_scenario(std::istream& is, SweepConfig& c, const std::string& source = "scenario") {
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = cfg::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key = value");
    try {
      apply_setting(c, cfg::trim(line.substr(0, eq)), cfg::trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

inline SweepConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read scenario file '" + path + "'");
  SweepConfig c;
  parse_scenario(in, c, path);
  return c;
}

}  // namespace fpnc
