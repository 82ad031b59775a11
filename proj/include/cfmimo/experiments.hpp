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

#include <chrono>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "cfmimo/monte_carlo.hpp"
#include "cfmimo/optimizer.hpp"
#include "cfmimo/se_terms.hpp"

namespace cfmimo {

enum class ExperimentKind {
  kValidate,
  kSweepInstant,
  kSweepTauC,
  kSweepTauP,
  kSweepAps,
  kSweepAntennas,
  kSweepPower,
  kOptimize,
  kTermBreakdown,
};

inline const char* kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::kValidate: return "validate";
    case ExperimentKind::kSweepInstant: return "sweep_instant";
    case ExperimentKind::kSweepTauC: return "sweep_tauc";
    case ExperimentKind::kSweepTauP: return "sweep_taup";
    case ExperimentKind::kSweepAps: return "sweep_aps";
    case ExperimentKind::kSweepAntennas: return "sweep_antennas";
    case ExperimentKind::kSweepPower: return "sweep_power";
    case ExperimentKind::kOptimize: return "optimize";
    case ExperimentKind::kTermBreakdown: return "term_breakdown";
  }
  return "?";
}

inline ExperimentKind parse_sweep_var(const std::string& var) {
  if (var == "instant") return ExperimentKind::kSweepInstant;
  if (var == "tauc") return ExperimentKind::kSweepTauC;
  if (var == "taup") return ExperimentKind::kSweepTauP;
  if (var == "aps") return ExperimentKind::kSweepAps;
  if (var == "antennas") return ExperimentKind::kSweepAntennas;
  if (var == "power") return ExperimentKind::kSweepPower;
  throw ConfigError("var", "unknown sweep variable: " + var);
}

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::kValidate;
  std::vector<double> grid;   // swept values (unused for validate/terms)
  long trials = 10000;        // Monte Carlo kinds only
  unsigned threads = 1;
  std::uint64_t seed = 1;     // overrides config seed
  int n_opt = 0;              // 0: anchor instant
  int rounds = 1;             // weight/power alternation rounds

  void validate() const {
    const bool needs_grid = kind != ExperimentKind::kValidate &&
                            kind != ExperimentKind::kTermBreakdown &&
                            kind != ExperimentKind::kOptimize;
    if (needs_grid && grid.empty()) throw ConfigError("grid", "grid must be nonempty");
    if (kind == ExperimentKind::kValidate && trials < 1)
      throw ConfigError("trials", "Monte Carlo kinds need trials >= 1");
  }
};

// Tabular results: fixed leading columns, then per-kind numeric columns.
struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::variant<std::string, double>>> rows;
};

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_csv(const ResultTable& t, std::ostream& os) {
  for (std::size_t c = 0; c < t.columns.size(); ++c)
    os << (c ? "," : "") << t.columns[c];
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) os << ",";
      if (std::holds_alternative<double>(row[c]))
        os << format_double(std::get<double>(row[c]));
      else
        os << std::get<std::string>(row[c]);
    }
    os << "\n";
  }
}

inline void write_csv_file(const ResultTable& t, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file: " + path);
  write_csv(t, f);
}

inline nlohmann::json table_to_json(const ResultTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json r;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (std::holds_alternative<double>(row[c]))
        r[t.columns[c]] = std::get<double>(row[c]);
      else
        r[t.columns[c]] = std::get<std::string>(row[c]);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

inline void write_json_file(const ResultTable& t, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file: " + path);
  f << table_to_json(t).dump(2) << "\n";
}

namespace detail {

struct Built {
  Scenario sc;
  std::vector<EstimationKernel> kers;
  TermCache tc;
};

inline Built build_all(const SystemConfig& cfg) {
  Built b;
  b.sc = build_scenario(cfg);
  b.kers = compute_kernels(b.sc);
  b.tc = build_term_cache(b.sc, b.kers);
  return b;
}

inline void push(ResultTable& t, std::vector<std::variant<std::string, double>> row) {
  t.rows.push_back(std::move(row));
}

}  // namespace detail

// Closed-form vs Monte Carlo per-UE SE comparison under the config's hardware.
inline ResultTable run_validate(const ExperimentSpec& spec, SystemConfig cfg) {
  cfg.seed = spec.seed;
  const auto b = detail::build_all(cfg);
  const Eigen::VectorXd p = Eigen::VectorXd::Constant(cfg.num_ues, cfg.p_max);
  ResultTable t;
  t.columns = {"experiment", "seed", "variant", "ue",
               "se_closed_form", "se_monte_carlo", "rel_err", "trials"};
  for (WeightMode mode : {WeightMode::kOptimal, WeightMode::kSld}) {
    const std::string variant = mode == WeightMode::kOptimal ? "lsfd" : "sld";
    const ScenarioSE cf = closed_form_se(b.sc, b.tc, p, mode);
    const McTermMeans mc =
        run_monte_carlo(b.sc, b.kers, cf.weights, p, spec.trials, spec.threads);
    for (int k = 0; k < cfg.num_ues; ++k) {
      double se_cf = 0.0, se_mc = 0.0;
      for (int d = 0; d < cfg.num_data_instants(); ++d) {
        se_cf += std::log2(1.0 + cf.sinr(k, d));
        se_mc += std::log2(1.0 + mc.sinr(k, d));
      }
      se_cf /= cfg.tau_c;
      se_mc /= cfg.tau_c;
      detail::push(t, {std::string(kind_name(spec.kind)), double(spec.seed), variant,
                       double(k), se_cf, se_mc,
                       std::abs(se_cf - se_mc) / std::max(se_cf, 1e-300),
                       double(mc.trials)});
    }
  }
  return t;
}

inline ResultTable run_sweep(const ExperimentSpec& spec, SystemConfig base) {
  ResultTable t;
  t.columns = {"experiment", "seed", "variant", "grid_value", "sum_se"};
  for (WeightMode mode : {WeightMode::kOptimal, WeightMode::kSld}) {
    const std::string variant = mode == WeightMode::kOptimal ? "lsfd" : "sld";
    for (double g : spec.grid) {
      SystemConfig cfg = base;
      cfg.seed = spec.seed;
      switch (spec.kind) {
        case ExperimentKind::kSweepTauC:
          cfg.tau_c = int(g);
          break;
        case ExperimentKind::kSweepTauP: {
          cfg.tau_p = int(g);
          break;
        }
        case ExperimentKind::kSweepAps: {
          const int M = int(g);
          cfg.num_aps = M;
          cfg.kappa_r.assign(std::size_t(M), base.kappa_r.empty() ? 0.0 : base.kappa_r[0]);
          cfg.adc_bits.assign(std::size_t(M) * cfg.num_antennas,
                              base.adc_bits.empty() ? kIdealBits : base.adc_bits[0]);
          break;
        }
        case ExperimentKind::kSweepAntennas: {
          const int N = int(g);
          cfg.num_antennas = N;
          cfg.adc_bits.assign(std::size_t(cfg.num_aps) * N,
                              base.adc_bits.empty() ? kIdealBits : base.adc_bits[0]);
          break;
        }
        case ExperimentKind::kSweepPower:
          break;  // grid value is the per-UE power in dBm
        case ExperimentKind::kSweepInstant:
          break;  // handled below
        default:
          throw ConfigError("kind", "not a sweep kind");
      }
      cfg.validate();
      const auto b = detail::build_all(cfg);
      Eigen::VectorXd p = Eigen::VectorXd::Constant(cfg.num_ues, cfg.p_max);
      if (spec.kind == ExperimentKind::kSweepPower)
        p.setConstant(dbm_to_watt(g));
      if (spec.kind == ExperimentKind::kSweepInstant) {
        const int n = int(g);
        if (n < cfg.anchor_instant() || n > cfg.tau_c)
          throw ConfigError("grid", "instant outside the data phase");
        double se_n = 0.0;
        for (int k = 0; k < cfg.num_ues; ++k) {
          const SETermSet terms = compute_se_terms(b.sc, b.tc, p, k, n);
          const Eigen::VectorXcd a = (mode == WeightMode::kOptimal)
                                         ? optimal_lsfd(b.sc, terms, p)
                                         : sld_weights(cfg.num_aps);
          se_n += std::log2(1.0 + assemble_sinr(b.sc, terms, p, a).sinr);
        }
        detail::push(t, {std::string(kind_name(spec.kind)), double(spec.seed), variant,
                         g, se_n});
      } else {
        const ScenarioSE cf = closed_form_se(b.sc, b.tc, p, mode);
        detail::push(t, {std::string(kind_name(spec.kind)), double(spec.seed), variant,
                         g, cf.sum_se});
      }
    }
  }
  return t;
}

inline ResultTable run_optimize(const ExperimentSpec& spec, SystemConfig cfg) {
  cfg.seed = spec.seed;
  const auto b = detail::build_all(cfg);
  const int n_opt = spec.n_opt > 0 ? spec.n_opt : cfg.anchor_instant();
  ResultTable t;
  t.columns = {"experiment", "seed",       "variant", "algorithm", "n_opt",
               "iterations", "runtime_ms", "rate_at_n_opt", "sum_se"};
  const Eigen::VectorXd p_full = Eigen::VectorXd::Constant(cfg.num_ues, cfg.p_max);

  for (WeightMode mode : {WeightMode::kOptimal, WeightMode::kSld}) {
    const std::string variant = mode == WeightMode::kOptimal ? "lsfd" : "sld";
    // full-power baseline
    {
      std::vector<Eigen::VectorXcd> w(std::size_t(cfg.num_ues));
      for (int k = 0; k < cfg.num_ues; ++k) {
        const SETermSet terms = compute_se_terms(b.sc, b.tc, p_full, k, n_opt);
        w[std::size_t(k)] = (mode == WeightMode::kOptimal)
                                ? optimal_lsfd(b.sc, terms, p_full)
                                : sld_weights(cfg.num_aps);
      }
      const AffineSinrCoeffs co = extract_affine_coeffs(b.sc, b.tc, w, n_opt);
      const ScenarioSE se = closed_form_se(b.sc, b.tc, p_full, mode);
      detail::push(t, {std::string(kind_name(spec.kind)), double(spec.seed), variant,
                       std::string("fpa"), double(n_opt), 0.0, 0.0,
                       co.rate(p_full), se.sum_se});
    }
    for (PowerAlgorithm alg :
         {PowerAlgorithm::kClosedForm, PowerAlgorithm::kProjectedGradient}) {
      const auto start = std::chrono::steady_clock::now();
      const AlternatingResult r =
          alternate_with_lsfd(b.sc, b.tc, n_opt, spec.rounds, alg, mode);
      const double ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start)
                            .count();
      const ScenarioSE se = closed_form_se(b.sc, b.tc, r.p, mode);
      detail::push(t, {std::string(kind_name(spec.kind)), double(spec.seed), variant,
                       std::string(alg == PowerAlgorithm::kClosedForm ? "mm_closed_form"
                                                                      : "mm_pg"),
                       double(n_opt), double(r.round_rate.size()), ms,
                       r.round_rate.back(), se.sum_se});
    }
  }
  return t;
}

inline ResultTable run_term_breakdown(const ExperimentSpec& spec, SystemConfig cfg) {
  cfg.seed = spec.seed;
  const auto b = detail::build_all(cfg);
  const Eigen::VectorXd p = Eigen::VectorXd::Constant(cfg.num_ues, cfg.p_max);
  ResultTable t;
  t.columns = {"experiment", "seed", "variant", "ue", "instant", "ds",  "bu",
               "ca",         "iui",  "dac",     "trf", "rrf",    "adc", "ns"};
  for (WeightMode mode : {WeightMode::kOptimal, WeightMode::kSld}) {
    const std::string variant = mode == WeightMode::kOptimal ? "lsfd" : "sld";
    for (int k = 0; k < cfg.num_ues; ++k) {
      for (int n = cfg.anchor_instant(); n <= cfg.tau_c; ++n) {
        const SETermSet terms = compute_se_terms(b.sc, b.tc, p, k, n);
        const Eigen::VectorXcd a = (mode == WeightMode::kOptimal)
                                       ? optimal_lsfd(b.sc, terms, p)
                                       : sld_weights(cfg.num_aps);
        const TermPowers tp = term_powers(b.sc, terms, p, a);
        detail::push(t, {std::string(kind_name(spec.kind)), double(spec.seed), variant,
                         double(k), double(n), tp.ds, tp.bu, tp.ca, tp.iui_total(),
                         tp.dac, tp.trf, tp.rrf, tp.adc, tp.ns});
      }
    }
  }
  return t;
}

inline ResultTable run_experiment(const ExperimentSpec& spec, const SystemConfig& cfg) {
  spec.validate();
  cfg.validate();
  switch (spec.kind) {
    case ExperimentKind::kValidate: return run_validate(spec, cfg);
    case ExperimentKind::kOptimize: return run_optimize(spec, cfg);
    case ExperimentKind::kTermBreakdown: return run_term_breakdown(spec, cfg);
    default: return run_sweep(spec, cfg);
  }
}

}  // namespace cfmimo
