// SPDX-License-Identifier: Apache-2.0
//
// cfmimo — uplink SE analysis for hardware-impaired cell-free massive MIMO
// with channel aging.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace cfmimo {

// Configuration / input errors carry the offending field path so CLI callers
// can emit machine-readable diagnostics.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

inline double dbm_to_watt(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }
inline double watt_to_dbm(double w) { return 10.0 * std::log10(w * 1e3); }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// ADC/DAC resolution; 0 encodes an ideal (infinite resolution) converter.
constexpr int kIdealBits = 0;

// All scenario, hardware and protocol parameters. Everything is stored in
// linear/SI units; dB/dBm conversions happen only at the JSON boundary.
struct SystemConfig {
  int num_aps = 16;           // M
  int num_ues = 8;            // K
  int num_antennas = 2;       // N per AP
  int tau_c = 50;             // instants per resource block
  int tau_p = 4;              // pilot instants
  double area_side = 1000.0;  // m
  double bandwidth = 20e6;    // Hz
  double noise_power = dbm_to_watt(-94.0);            // W
  std::vector<double> pilot_power;                    // W, per UE
  double p_max = dbm_to_watt(20.0);                   // W
  std::vector<double> velocities;                     // m/s, per UE
  double carrier_freq = 2e9;                          // Hz
  double sample_time = 1e-3;                          // s
  std::vector<double> kappa_t;                        // transmit EVM, per UE
  std::vector<double> kappa_r;                        // receive EVM, per AP
  std::vector<int> dac_bits;                          // per UE, 0 = ideal
  std::vector<int> adc_bits;                          // per AP antenna, M*N
  double asd_deg = 30.0;                              // angular std deviation
  double shadow_sigma_db = 4.0;
  double antenna_spacing = 0.5;                       // wavelengths
  std::uint64_t seed = 1;

  int anchor_instant() const { return tau_p + 1; }    // lambda, 1-based
  int num_data_instants() const { return tau_c - tau_p; }

  void validate() const {
    if (num_aps < 1) throw ConfigError("m", "need at least one AP");
    if (num_ues < 1) throw ConfigError("k", "need at least one UE");
    if (num_antennas < 1) throw ConfigError("n", "need at least one antenna");
    if (tau_p < 1) throw ConfigError("tau_p", "must be >= 1");
    if (tau_p >= tau_c)
      throw ConfigError("tau_p", "must be < tau_c");
    if (anchor_instant() > tau_c)
      throw ConfigError("tau_c", "anchor instant tau_p+1 exceeds tau_c");
    if (area_side <= 0) throw ConfigError("area_side_m", "must be > 0");
    if (noise_power < 0 || !std::isfinite(noise_power))
      throw ConfigError("noise_power_dbm", "must be finite and >= 0");
    if (p_max < 0) throw ConfigError("p_max_dbm", "negative power");
    auto check_len = [&](const auto& v, std::size_t want, const char* name) {
      if (v.size() != want)
        throw ConfigError(name, "expected length " + std::to_string(want) +
                                    ", got " + std::to_string(v.size()));
    };
    check_len(pilot_power, num_ues, "pilot_power_dbm");
    check_len(velocities, num_ues, "velocities_mps");
    check_len(kappa_t, num_ues, "kappa_t");
    check_len(kappa_r, num_aps, "kappa_r");
    check_len(dac_bits, num_ues, "dac_bits");
    check_len(adc_bits, std::size_t(num_aps) * num_antennas, "adc_bits");
    for (double p : pilot_power)
      if (p < 0) throw ConfigError("pilot_power_dbm", "negative power");
    for (double v : velocities)
      if (v < 0) throw ConfigError("velocities_mps", "negative velocity");
    for (double k : kappa_t)
      if (k < 0) throw ConfigError("kappa_t", "EVM must be >= 0");
    for (double k : kappa_r)
      if (k < 0) throw ConfigError("kappa_r", "EVM must be >= 0");
    for (int b : dac_bits)
      if (b != kIdealBits && b < 1) throw ConfigError("dac_bits", "bits must be >= 1 or ideal");
    for (int b : adc_bits)
      if (b != kIdealBits && b < 1) throw ConfigError("adc_bits", "bits must be >= 1 or ideal");
  }
};

namespace detail {

inline std::vector<double> expand_real(const nlohmann::json& j, std::size_t n,
                                       const std::string& field) {
  std::vector<double> out;
  if (j.is_number()) {
    out.assign(n, j.get<double>());
  } else if (j.is_array()) {
    if (j.size() != n)
      throw ConfigError(field, "expected scalar or array of length " + std::to_string(n));
    for (const auto& e : j) out.push_back(e.get<double>());
  } else {
    throw ConfigError(field, "expected number or array");
  }
  return out;
}

inline int bits_entry(const nlohmann::json& j, const std::string& field) {
  if (j.is_string()) {
    if (j.get<std::string>() == "ideal") return kIdealBits;
    throw ConfigError(field, "string entries must be \"ideal\"");
  }
  const int b = j.get<int>();
  if (b < 1) throw ConfigError(field, "bits must be >= 1 or \"ideal\"");
  return b;
}

// ADC resolutions accept a scalar, "ideal", a per-antenna vector (length M*N),
// a per-AP vector (length M), or a short pattern that is tiled blockwise over
// the APs (e.g. [1,2,4,6] gives each quarter of the APs one resolution).
inline std::vector<int> expand_adc_bits(const nlohmann::json& j, int M, int N) {
  const std::size_t total = std::size_t(M) * N;
  std::vector<int> out(total, kIdealBits);
  if (j.is_number() || j.is_string()) {
    const int b = bits_entry(j, "adc_bits");
    out.assign(total, b);
    return out;
  }
  if (!j.is_array()) throw ConfigError("adc_bits", "expected number, \"ideal\" or array");
  std::vector<int> vals;
  for (const auto& e : j) vals.push_back(bits_entry(e, "adc_bits"));
  if (vals.size() == total) {
    out = vals;
  } else if (vals.size() == std::size_t(M)) {
    for (int m = 0; m < M; ++m)
      for (int a = 0; a < N; ++a) out[std::size_t(m) * N + a] = vals[m];
  } else if (!vals.empty() && M % vals.size() == 0) {
    const std::size_t block = M / vals.size();
    for (int m = 0; m < M; ++m) {
      const int b = vals[std::size_t(m) / block];
      for (int a = 0; a < N; ++a) out[std::size_t(m) * N + a] = b;
    }
  } else {
    throw ConfigError("adc_bits", "array length must be M*N, M, or divide M");
  }
  return out;
}

inline std::vector<int> expand_dac_bits(const nlohmann::json& j, int K) {
  std::vector<int> out;
  if (j.is_number() || j.is_string()) {
    out.assign(K, bits_entry(j, "dac_bits"));
    return out;
  }
  if (!j.is_array()) throw ConfigError("dac_bits", "expected number, \"ideal\" or array");
  if (j.size() != std::size_t(K))
    throw ConfigError("dac_bits", "array length must equal K");
  for (const auto& e : j) out.push_back(bits_entry(e, "dac_bits"));
  return out;
}

}  // namespace detail

inline SystemConfig config_from_json(const nlohmann::json& j) {
  SystemConfig c;
  auto get = [&](const char* key, auto& dst) {
    if (j.contains(key)) dst = j.at(key).template get<std::decay_t<decltype(dst)>>();
  };
  get("m", c.num_aps);
  get("k", c.num_ues);
  get("n", c.num_antennas);
  get("tau_c", c.tau_c);
  get("tau_p", c.tau_p);
  get("area_side_m", c.area_side);
  get("bandwidth_hz", c.bandwidth);
  if (j.contains("noise_power_dbm")) c.noise_power = dbm_to_watt(j.at("noise_power_dbm").get<double>());
  if (j.contains("p_max_dbm")) c.p_max = dbm_to_watt(j.at("p_max_dbm").get<double>());
  get("carrier_freq_hz", c.carrier_freq);
  get("sample_time_s", c.sample_time);
  get("asd_deg", c.asd_deg);
  get("shadow_sigma_db", c.shadow_sigma_db);
  get("antenna_spacing_wavelengths", c.antenna_spacing);
  get("seed", c.seed);

  const std::size_t K = c.num_ues, M = c.num_aps;
  if (j.contains("pilot_power_dbm")) {
    c.pilot_power = detail::expand_real(j.at("pilot_power_dbm"), K, "pilot_power_dbm");
    for (double& p : c.pilot_power) p = dbm_to_watt(p);
  } else {
    c.pilot_power.assign(K, dbm_to_watt(10.0));
  }
  if (j.contains("velocities_mps"))
    c.velocities = detail::expand_real(j.at("velocities_mps"), K, "velocities_mps");
  else if (j.contains("velocities_kmh")) {
    c.velocities = detail::expand_real(j.at("velocities_kmh"), K, "velocities_kmh");
    for (double& v : c.velocities) v /= 3.6;
  } else
    c.velocities.assign(K, 15.0);
  c.kappa_t = j.contains("kappa_t") ? detail::expand_real(j.at("kappa_t"), K, "kappa_t")
                                    : std::vector<double>(K, 0.0);
  c.kappa_r = j.contains("kappa_r") ? detail::expand_real(j.at("kappa_r"), M, "kappa_r")
                                    : std::vector<double>(M, 0.0);
  c.dac_bits = j.contains("dac_bits") ? detail::expand_dac_bits(j.at("dac_bits"), c.num_ues)
                                      : std::vector<int>(K, kIdealBits);
  c.adc_bits = j.contains("adc_bits")
                   ? detail::expand_adc_bits(j.at("adc_bits"), c.num_aps, c.num_antennas)
                   : std::vector<int>(std::size_t(M) * c.num_antennas, kIdealBits);
  c.validate();
  return c;
}

inline SystemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("", std::string("config parse error: ") + e.what());
  }
  return config_from_json(j);
}

// Uniform-impairment helper used by tests and the experiment presets.
inline SystemConfig make_config(int M, int K, int N, int tau_c, int tau_p,
                                std::uint64_t seed) {
  SystemConfig c;
  c.num_aps = M;
  c.num_ues = K;
  c.num_antennas = N;
  c.tau_c = tau_c;
  c.tau_p = tau_p;
  c.seed = seed;
  c.pilot_power.assign(K, dbm_to_watt(10.0));
  c.velocities.assign(K, 15.0);
  c.kappa_t.assign(K, 0.0);
  c.kappa_r.assign(M, 0.0);
  c.dac_bits.assign(K, kIdealBits);
  c.adc_bits.assign(std::size_t(M) * N, kIdealBits);
  return c;
}

}  // namespace cfmimo
