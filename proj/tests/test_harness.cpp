// SPDX-License-Identifier: Apache-2.0
//
// cfmimo — uplink SE analysis for hardware-impaired cell-free massive MIMO
// with channel aging.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <sstream>

#include "cfmimo/experiments.hpp"

using namespace cfmimo;

namespace {

SystemConfig harness_config() {
  SystemConfig cfg = make_config(4, 3, 2, 16, 3, 5);
  cfg.kappa_t.assign(3, 0.1);
  cfg.kappa_r.assign(4, 0.1);
  cfg.dac_bits.assign(3, 4);
  cfg.adc_bits.assign(8, 4);
  cfg.velocities = {5.0, 20.0, 40.0};
  cfg.sample_time = 1e-4;
  return cfg;
}

std::string csv_of(const ResultTable& t) {
  std::ostringstream os;
  write_csv(t, os);
  return os.str();
}

}  // namespace

TEST_CASE("csv writer basics") {
  ResultTable t;
  t.columns = {"a", "b"};
  REQUIRE(csv_of(t) == "a,b\n");
  t.rows.push_back({std::string("x"), 1.0 / 3.0});
  const std::string s = csv_of(t);
  REQUIRE(s.find("x,0.3333333333333333") != std::string::npos);
  // 17 significant digits round-trip bit-exactly
  const double v = 0.1 + 0.2;
  REQUIRE(std::strtod(format_double(v).c_str(), nullptr) == v);
  const double w = 6.02214076e23;
  REQUIRE(std::strtod(format_double(w).c_str(), nullptr) == w);
}

TEST_CASE("validate experiment: closed form and simulation agree") {
  ExperimentSpec spec;
  spec.kind = ExperimentKind::kValidate;
  spec.trials = 20000;
  spec.threads = 2;
  spec.seed = 5;
  const ResultTable t = run_experiment(spec, harness_config());
  REQUIRE(t.columns[4] == "se_closed_form");
  REQUIRE(!t.rows.empty());
  for (const auto& row : t.rows) {
    const double rel = std::get<double>(row[6]);
    REQUIRE(rel < 0.05);
  }
}

TEST_CASE("instant sweep decreases under fast aging") {
  SystemConfig cfg = harness_config();
  // 212 km/h with a sampling interval that keeps the whole block inside the
  // first lobe of the temporal correlation
  cfg.velocities.assign(3, 212.0 / 3.6);
  cfg.sample_time = 2e-5;
  ExperimentSpec spec;
  spec.kind = ExperimentKind::kSweepInstant;
  spec.seed = 5;
  for (int n = cfg.anchor_instant(); n <= cfg.tau_c; ++n)
    spec.grid.push_back(double(n));
  const ResultTable t = run_experiment(spec, cfg);
  double last = 1e300;
  for (const auto& row : t.rows) {
    if (std::get<std::string>(row[2]) != "lsfd") continue;
    const double se = std::get<double>(row[4]);
    REQUIRE(se < last);
    last = se;
  }
}

TEST_CASE("term breakdown: static UEs have zero aging power") {
  SystemConfig cfg = harness_config();
  cfg.velocities.assign(3, 0.0);
  ExperimentSpec spec;
  spec.kind = ExperimentKind::kTermBreakdown;
  spec.seed = 5;
  const ResultTable t = run_experiment(spec, cfg);
  const std::size_t ca_col = 7;
  REQUIRE(t.columns[ca_col] == "ca");
  for (const auto& row : t.rows) REQUIRE(std::get<double>(row[ca_col]) == 0.0);
}

TEST_CASE("experiment output is deterministic") {
  ExperimentSpec spec;
  spec.kind = ExperimentKind::kValidate;
  spec.trials = 500;
  spec.seed = 11;
  spec.threads = 1;
  const std::string a = csv_of(run_experiment(spec, harness_config()));
  spec.threads = 2;
  const std::string b = csv_of(run_experiment(spec, harness_config()));
  REQUIRE(a == b);

  ExperimentSpec sweep;
  sweep.kind = ExperimentKind::kSweepTauC;
  sweep.grid = {12, 16, 20};
  sweep.seed = 11;
  const std::string c = csv_of(run_experiment(sweep, harness_config()));
  const std::string d = csv_of(run_experiment(sweep, harness_config()));
  REQUIRE(c == d);
}

TEST_CASE("sweeps cover the advertised axes") {
  SystemConfig cfg = harness_config();
  for (auto kind : {ExperimentKind::kSweepTauP, ExperimentKind::kSweepAps,
                    ExperimentKind::kSweepAntennas, ExperimentKind::kSweepPower}) {
    ExperimentSpec spec;
    spec.kind = kind;
    spec.seed = 3;
    switch (kind) {
      case ExperimentKind::kSweepTauP: spec.grid = {1, 3}; break;
      case ExperimentKind::kSweepAps: spec.grid = {2, 4}; break;
      case ExperimentKind::kSweepAntennas: spec.grid = {1, 2}; break;
      default: spec.grid = {0.0, 10.0, 20.0}; break;
    }
    const ResultTable t = run_experiment(spec, cfg);
    REQUIRE(t.rows.size() == 2 * spec.grid.size());  // lsfd + sld variants
    for (const auto& row : t.rows) REQUIRE(std::get<double>(row[4]) > 0.0);
  }
  // more transmit power never hurts the full-power sum SE
  ExperimentSpec spec;
  spec.kind = ExperimentKind::kSweepPower;
  spec.seed = 3;
  spec.grid = {-10.0, 0.0, 10.0, 20.0};
  const ResultTable t = run_experiment(spec, cfg);
  double last = 0.0;
  for (const auto& row : t.rows) {
    if (std::get<std::string>(row[2]) != "lsfd") continue;
    const double se = std::get<double>(row[4]);
    REQUIRE(se >= last - 1e-12);
    last = se;
  }
}

TEST_CASE("optimize experiment reports the three strategies") {
  ExperimentSpec spec;
  spec.kind = ExperimentKind::kOptimize;
  spec.seed = 7;
  spec.rounds = 1;
  const ResultTable t = run_experiment(spec, harness_config());
  REQUIRE(t.rows.size() == 6);  // {fpa, closed form, gradient} x {lsfd, sld}
  double fpa_lsfd = 0, mm_lsfd = 0;
  for (const auto& row : t.rows) {
    const std::string variant = std::get<std::string>(row[2]);
    const std::string alg = std::get<std::string>(row[3]);
    const double rate = std::get<double>(row[7]);
    if (variant == "lsfd" && alg == "fpa") fpa_lsfd = rate;
    if (variant == "lsfd" && alg == "mm_closed_form") mm_lsfd = rate;
  }
  REQUIRE(mm_lsfd >= fpa_lsfd - 1e-9);
}

TEST_CASE("experiment spec validation") {
  ExperimentSpec spec;
  spec.kind = ExperimentKind::kSweepTauC;
  REQUIRE_THROWS_AS(spec.validate(), ConfigError);
  spec.grid = {10.0};
  REQUIRE_NOTHROW(spec.validate());
}

TEST_CASE("json mirror carries identical values") {
  ResultTable t;
  t.columns = {"name", "value"};
  t.rows.push_back({std::string("row0"), 1.25});
  const nlohmann::json j = table_to_json(t);
  REQUIRE(j[0]["name"] == "row0");
  REQUIRE(j[0]["value"] == 1.25);
}
