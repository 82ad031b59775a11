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

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "cfmimo/config.hpp"
#include "cfmimo/hardware.hpp"
#include "cfmimo/rng.hpp"
#include "cfmimo/temporal.hpp"

namespace cfmimo {

struct Position {
  double x = 0.0;
  double y = 0.0;
};

struct Layout {
  std::vector<Position> aps;
  std::vector<Position> ues;
};

// Signed minimum-image displacement on the square torus of side L.
inline double torus_delta(double from, double to, double side) {
  double d = to - from;
  d -= side * std::round(d / side);
  return d;
}

// Wrap-around distance: minimum over the nine shifted copies of the area.
inline double torus_distance(const Position& a, const Position& b, double side) {
  const double dx = torus_delta(a.x, b.x, side);
  const double dy = torus_delta(a.y, b.y, side);
  return std::hypot(dx, dy);
}

inline Layout generate_layout(const SystemConfig& cfg, RngStream& rng) {
  if (cfg.area_side <= 0) throw std::domain_error("generate_layout: area_side must be > 0");
  Layout lay;
  lay.aps.resize(std::size_t(cfg.num_aps));
  lay.ues.resize(std::size_t(cfg.num_ues));
  for (auto& p : lay.aps) p = {cfg.area_side * rng.uniform(), cfg.area_side * rng.uniform()};
  for (auto& p : lay.ues) p = {cfg.area_side * rng.uniform(), cfg.area_side * rng.uniform()};
  return lay;
}

struct LargeScale {
  double beta = 0.0;      // linear gain
  double rician_k = 0.0;  // linear Rician factor
};

// Path loss -30.9 - 26 log10(d) dB plus shadowing (supplied in dB), Rician
// factor 13 - 0.03 d dB; both returned in linear scale.
inline LargeScale compute_large_scale(double distance_m, double shadow_db) {
  if (distance_m <= 0) throw std::domain_error("compute_large_scale: distance must be > 0");
  const double beta_db = -30.9 - 26.0 * std::log10(distance_m) + shadow_db;
  const double k_db = 13.0 - 0.03 * distance_m;
  return {db_to_linear(beta_db), db_to_linear(k_db)};
}

// Unit-modulus steering vector [1, e^{j s}, ..., e^{j (N-1) s}].
inline Eigen::VectorXcd steering_vector(double phase_step, int n) {
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v(i) = std::polar(1.0, phase_step * double(i));
  return v;
}

inline Eigen::VectorXcd build_los_vector(double aoa_rad, int n) {
  return steering_vector(aoa_rad, n);
}

// Gaussian local scattering correlation (unit diagonal): entry (l,m) is
// e^{j 2 pi D (l-m) sin(aoa)} e^{-(asd^2/2) (2 pi D (l-m) cos(aoa))^2}.
inline Eigen::MatrixXcd build_spatial_correlation(double aoa_rad, double asd_deg,
                                                  int n, double spacing = 0.5) {
  if (n < 1) throw std::domain_error("build_spatial_correlation: n must be >= 1");
  const double asd = asd_deg * M_PI / 180.0;
  Eigen::MatrixXcd r(n, n);
  for (int l = 0; l < n; ++l) {
    for (int m = 0; m < n; ++m) {
      const double arg = 2.0 * M_PI * spacing * double(l - m);
      const double damp = std::exp(-0.5 * asd * asd * arg * arg *
                                   std::cos(aoa_rad) * std::cos(aoa_rad));
      r(l, m) = std::polar(damp, arg * std::sin(aoa_rad));
    }
  }
  r = (0.5 * (r + r.adjoint().eval())).eval();  // enforce Hermitian symmetry
  return r;
}

struct PilotAssignment {
  std::vector<int> pilot_of;            // 0-based pilot instant per UE
  std::vector<std::vector<int>> copilot;  // P_k per UE (includes k)
  std::vector<std::vector<int>> group;    // UEs per pilot instant
};

// Round-robin pilots: UE k (0-based) transmits at instant k mod tau_p.
inline PilotAssignment assign_pilots(int K, int tau_p) {
  PilotAssignment pa;
  pa.pilot_of.resize(std::size_t(K));
  pa.group.assign(std::size_t(tau_p), {});
  for (int k = 0; k < K; ++k) {
    pa.pilot_of[std::size_t(k)] = k % tau_p;
    pa.group[std::size_t(k % tau_p)].push_back(k);
  }
  pa.copilot.resize(std::size_t(K));
  for (int k = 0; k < K; ++k) pa.copilot[std::size_t(k)] = pa.group[std::size_t(pa.pilot_of[std::size_t(k)])];
  return pa;
}

// Per-link long-term statistics.
struct LinkStatistics {
  double beta = 0.0;
  double rician_k = 0.0;
  double aoa_rad = 0.0;
  Eigen::VectorXcd h_bar;   // LoS component, scaled
  Eigen::MatrixXcd R;       // NLoS covariance, scaled
  Eigen::MatrixXcd R_bar;   // h_bar h_bar^H + R
  Eigen::MatrixXcd sqrt_R;  // Hermitian square root of R
};

inline Eigen::MatrixXcd hermitian_sqrt(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
}

inline LinkStatistics make_link_statistics(double beta, double rician_k,
                                           double aoa_rad, double asd_deg, int n,
                                           double spacing) {
  LinkStatistics ls;
  ls.beta = beta;
  ls.rician_k = rician_k;
  ls.aoa_rad = aoa_rad;
  ls.h_bar = std::sqrt(rician_k * beta / (rician_k + 1.0)) * build_los_vector(aoa_rad, n);
  ls.R = (beta / (rician_k + 1.0)) * build_spatial_correlation(aoa_rad, asd_deg, n, spacing);
  ls.R_bar = ls.h_bar * ls.h_bar.adjoint() + ls.R;
  ls.sqrt_R = hermitian_sqrt(ls.R);
  return ls;
}

// Everything long-term for one network draw: geometry, link statistics, pilot
// assignment, aging profiles and the hardware profile.
struct Scenario {
  SystemConfig cfg;
  Layout layout;
  std::vector<LinkStatistics> links;  // row-major (m, k)
  PilotAssignment pilots;
  std::vector<AgingProfile> aging;    // per UE
  HardwareProfile hw;

  const LinkStatistics& link(int m, int k) const {
    return links[std::size_t(m) * std::size_t(cfg.num_ues) + std::size_t(k)];
  }
  // rho_k[lambda - t_k]: correlation between the pilot instant and the anchor.
  double rho_pilot(int k) const {
    const int lag = cfg.anchor_instant() - (pilots.pilot_of[std::size_t(k)] + 1);
    return aging[std::size_t(k)].at(lag);
  }
  // rho_k[n - lambda] for a 1-based data instant n.
  double rho_data(int k, int n) const {
    return aging[std::size_t(k)].at(n - cfg.anchor_instant());
  }
};

inline Scenario build_scenario(const SystemConfig& cfg) {
  cfg.validate();
  Scenario sc;
  sc.cfg = cfg;
  RngStream layout_rng(cfg.seed, 0x5ce7a110);
  sc.layout = generate_layout(cfg, layout_rng);
  RngStream shadow_rng(cfg.seed, 0x5ad0f);
  sc.links.resize(std::size_t(cfg.num_aps) * std::size_t(cfg.num_ues));
  for (int m = 0; m < cfg.num_aps; ++m) {
    for (int k = 0; k < cfg.num_ues; ++k) {
      const auto& ap = sc.layout.aps[std::size_t(m)];
      const auto& ue = sc.layout.ues[std::size_t(k)];
      const double d = std::max(1.0, torus_distance(ap, ue, cfg.area_side));
      const double shadow = cfg.shadow_sigma_db * shadow_rng.normal();
      const LargeScale lsc = compute_large_scale(d, shadow);
      const double aoa =
          std::atan2(torus_delta(ap.y, ue.y, cfg.area_side), torus_delta(ap.x, ue.x, cfg.area_side));
      sc.links[std::size_t(m) * std::size_t(cfg.num_ues) + std::size_t(k)] =
          make_link_statistics(lsc.beta, lsc.rician_k, aoa, cfg.asd_deg,
                               cfg.num_antennas, cfg.antenna_spacing);
    }
  }
  sc.pilots = assign_pilots(cfg.num_ues, cfg.tau_p);
  sc.aging.resize(std::size_t(cfg.num_ues));
  for (int k = 0; k < cfg.num_ues; ++k)
    sc.aging[std::size_t(k)] = build_aging_profile(cfg.velocities[std::size_t(k)],
                                                   cfg.carrier_freq, cfg.sample_time, cfg.tau_c);
  sc.hw = build_hardware(cfg);
  return sc;
}

}  // namespace cfmimo
