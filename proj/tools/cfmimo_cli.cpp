// SPDX-License-Identifier: Apache-2.0
//
// cfmimo — uplink SE analysis for hardware-impaired cell-free massive MIMO
// with channel aging.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cfmimo/experiments.hpp"
#include "cfmimo/hardware.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_path;
  std::string json_path;
  std::uint64_t seed = 1;
  long trials = 10000;
  unsigned threads = 1;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_trials) {
  cmd->add_option("--config", o.config_path, "scenario config (JSON)")->required();
  cmd->add_option("--out", o.out_path, "output CSV path")->required();
  cmd->add_option("--json", o.json_path, "optional JSON mirror of the output");
  cmd->add_option("--seed", o.seed, "RNG seed");
  if (needs_trials) cmd->add_option("--trials", o.trials, "Monte Carlo trials");
  cmd->add_option("--threads", o.threads, "worker threads");
}

void emit(const cfmimo::ResultTable& t, const CommonOpts& o) {
  cfmimo::write_csv_file(t, o.out_path);
  if (!o.json_path.empty()) cfmimo::write_json_file(t, o.json_path);
}

int fail(const std::string& field, const std::string& message) {
  nlohmann::json err{{"error", message}};
  if (!field.empty()) err["field"] = field;
  std::cerr << err.dump() << std::endl;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cell-free massive MIMO uplink SE analysis and power optimization"};
  app.require_subcommand(1);

  CommonOpts vo, so, oo, to;
  std::string sweep_var;
  std::vector<double> grid;
  int n_opt = 0, rounds = 1;

  auto* validate = app.add_subcommand(
      "validate", "closed-form vs simulated per-UE SE under the config's hardware");
  add_common(validate, vo, true);

  auto* sweep = app.add_subcommand("sweep", "closed-form SE over a parameter grid");
  add_common(sweep, so, false);
  sweep->add_option("--var", sweep_var,
                    "swept variable: instant|tauc|taup|aps|antennas|power")
      ->required();
  sweep->add_option("--grid", grid, "grid values")->required()->delimiter(',');

  auto* optimize = app.add_subcommand(
      "optimize", "transmit-power optimization (closed-form and gradient MM)");
  add_common(optimize, oo, false);
  optimize->add_option("--n-opt", n_opt, "optimization instant (default: anchor)");
  optimize->add_option("--rounds", rounds, "weight/power alternation rounds");

  auto* terms = app.add_subcommand(
      "terms", "per-(UE, instant) signal and interference power breakdown");
  add_common(terms, to, false);

  auto* adc_table = app.add_subcommand(
      "adc-table", "print the quantizer distortion table (Lloyd-Max)");
  int adc_max_bits = 8;
  adc_table->add_option("--max-bits", adc_max_bits, "largest resolution to print");

  CLI11_PARSE(app, argc, argv);

  try {
    if (adc_table->parsed()) {
      std::printf("bits,distortion\n");
      for (int b = 1; b <= adc_max_bits; ++b)
        std::printf("%d,%.12e\n", b, cfmimo::lloyd_max_distortion(b));
      return 0;
    }
    cfmimo::ExperimentSpec spec;
    CommonOpts* o = nullptr;
    if (validate->parsed()) {
      spec.kind = cfmimo::ExperimentKind::kValidate;
      o = &vo;
    } else if (sweep->parsed()) {
      spec.kind = cfmimo::parse_sweep_var(sweep_var);
      spec.grid = grid;
      o = &so;
    } else if (optimize->parsed()) {
      spec.kind = cfmimo::ExperimentKind::kOptimize;
      spec.n_opt = n_opt;
      spec.rounds = rounds;
      o = &oo;
    } else {
      spec.kind = cfmimo::ExperimentKind::kTermBreakdown;
      o = &to;
    }
    spec.seed = o->seed;
    spec.trials = o->trials;
    spec.threads = o->threads;
    const cfmimo::SystemConfig cfg = cfmimo::load_config(o->config_path);
    emit(cfmimo::run_experiment(spec, cfg), *o);
    return 0;
  } catch (const cfmimo::ConfigError& e) {
    return fail(e.field(), e.what());
  } catch (const std::exception& e) {
    return fail("", e.what());
  }
}
