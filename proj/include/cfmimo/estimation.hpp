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

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "cfmimo/scenario.hpp"

namespace cfmimo {

// Linear estimator state for one (AP m, UE k) link at the anchor instant.
//
//   Psi       inverse of the received-pilot covariance at AP m for k's group
//   W_est     estimator matrix: h_hat = W_est * y_pilot
//   P         alpha sqrt(pp) rho_p * Psi A R_bar A   (pilot-side kernel)
//   G         alpha sqrt(pp) rho_p * Psi A R_bar     (same without trailing A)
//   Gamma_bar E{h_hat h_hat^H}
//   C_err     R_bar - Gamma_bar
struct EstimationKernel {
  Eigen::MatrixXcd Psi;
  Eigen::MatrixXcd W_est;
  Eigen::MatrixXcd P;
  Eigen::MatrixXcd G;
  Eigen::MatrixXcd Gamma_bar;
  Eigen::MatrixXcd C_err;
  double psi_condition = 0.0;
  double scale = 0.0;  // alpha_{d,k} sqrt(pilot_power_k) rho_k[lambda - t_k]
};

// Pilot-observation covariance at AP m for UE k's co-pilot group:
//   sum_j alpha_j (1+kappa_t_j^2) pp_j A R_bar_j A
//   + (B + kappa_r^2 A) J + sigma^2 A,   J = sum_j (1+kappa_t_j^2) alpha_j pp_j diag(R_bar_j)
inline Eigen::MatrixXcd pilot_covariance(const Scenario& sc, int m, int k) {
  const auto& cfg = sc.cfg;
  const int N = cfg.num_antennas;
  const Eigen::VectorXd& A = sc.hw.A[std::size_t(m)];
  const Eigen::VectorXd& B = sc.hw.B[std::size_t(m)];
  const double kr2 = sc.hw.kappa_r[std::size_t(m)] * sc.hw.kappa_r[std::size_t(m)];
  Eigen::MatrixXcd cov = Eigen::MatrixXcd::Zero(N, N);
  Eigen::VectorXd J = Eigen::VectorXd::Zero(N);
  for (int j : sc.pilots.copilot[std::size_t(k)]) {
    const auto& lj = sc.link(m, j);
    const double w = (1.0 + cfg.kappa_t[std::size_t(j)] * cfg.kappa_t[std::size_t(j)]) *
                     sc.hw.alpha_d[std::size_t(j)] * cfg.pilot_power[std::size_t(j)];
    cov += w * (A.asDiagonal() * lj.R_bar * A.asDiagonal());
    J += w * lj.R_bar.diagonal().real();
  }
  cov += ((B + kr2 * A).array() * J.array()).matrix().asDiagonal();
  cov += (cfg.noise_power * A).asDiagonal();
  return cov;
}

inline EstimationKernel compute_psi(const Scenario& sc, int m, int k) {
  const auto& cfg = sc.cfg;
  const auto& lk = sc.link(m, k);
  const Eigen::VectorXd& A = sc.hw.A[std::size_t(m)];

  const Eigen::MatrixXcd cov = pilot_covariance(sc, m, k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(cov);
  const double ev_min = es.eigenvalues().minCoeff();
  const double ev_max = es.eigenvalues().maxCoeff();
  if (!(ev_min > 0.0) || !std::isfinite(ev_max))
    throw std::runtime_error(
        "compute_psi: pilot covariance is singular at AP " + std::to_string(m) +
        ", UE " + std::to_string(k) + " (zero noise with zero-power pilots?)");

  EstimationKernel ker;
  ker.Psi = es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
            es.eigenvectors().adjoint();
  ker.psi_condition = ev_max / ev_min;
  ker.scale = sc.hw.alpha_d[std::size_t(k)] *
              std::sqrt(cfg.pilot_power[std::size_t(k)]) * sc.rho_pilot(k);
  ker.W_est = ker.scale * lk.R_bar * A.asDiagonal() * ker.Psi;
  ker.G = ker.scale * ker.Psi * A.asDiagonal() * lk.R_bar;
  ker.P = ker.G * A.asDiagonal();
  ker.Gamma_bar = ker.scale * ker.scale * lk.R_bar * A.asDiagonal() * ker.Psi *
                  A.asDiagonal() * lk.R_bar;
  ker.Gamma_bar = 0.5 * (ker.Gamma_bar + ker.Gamma_bar.adjoint().eval());
  ker.C_err = lk.R_bar - ker.Gamma_bar;
  return ker;
}

inline Eigen::VectorXcd lmmse_estimate(const Eigen::VectorXcd& y_pilot,
                                       const EstimationKernel& ker) {
  return ker.W_est * y_pilot;
}

inline Eigen::MatrixXcd error_covariance(const EstimationKernel& ker) {
  return ker.C_err;
}

// Kernel for the genie-phase estimator of one link: the UE-k term of the pilot
// covariance keeps only its NLoS part (the LoS direction is known once the
// phases are given), everything else is unchanged.
struct PhaseAwareKernel {
  Eigen::MatrixXcd W_est;  // alpha sqrt(pp) rho_p * R A Psi~
  double scale = 0.0;
};

inline PhaseAwareKernel compute_phase_aware_kernel(const Scenario& sc, int m, int k) {
  const auto& cfg = sc.cfg;
  const auto& lk = sc.link(m, k);
  const Eigen::VectorXd& A = sc.hw.A[std::size_t(m)];
  const double w_k = (1.0 + cfg.kappa_t[std::size_t(k)] * cfg.kappa_t[std::size_t(k)]) *
                     sc.hw.alpha_d[std::size_t(k)] * cfg.pilot_power[std::size_t(k)];
  Eigen::MatrixXcd cov = pilot_covariance(sc, m, k);
  cov -= w_k * (A.asDiagonal() * (lk.h_bar * lk.h_bar.adjoint()) * A.asDiagonal());
  PhaseAwareKernel ker;
  ker.scale = sc.hw.alpha_d[std::size_t(k)] *
              std::sqrt(cfg.pilot_power[std::size_t(k)]) * sc.rho_pilot(k);
  ker.W_est = ker.scale * lk.R * A.asDiagonal() *
              cov.selfadjointView<Eigen::Lower>().ldlt().solve(
                  Eigen::MatrixXcd::Identity(cfg.num_antennas, cfg.num_antennas));
  return ker;
}

// Genie-phase estimate; phi_anchor and phi_pilot are the realized LoS phases
// of link (m,k) at the anchor and pilot instants.
inline Eigen::VectorXcd phase_aware_estimate(const Eigen::VectorXcd& y_pilot,
                                             double phi_anchor, double phi_pilot,
                                             const Scenario& sc, int m, int k,
                                             const PhaseAwareKernel& ker) {
  const auto& lk = sc.link(m, k);
  const double rho_p = sc.rho_pilot(k);
  const double rho_bar = std::sqrt(std::max(0.0, 1.0 - rho_p * rho_p));
  const std::complex<double> mean_coef =
      sc.hw.alpha_d[std::size_t(k)] * std::sqrt(sc.cfg.pilot_power[std::size_t(k)]) *
      (rho_p * std::polar(1.0, phi_anchor) + rho_bar * std::polar(1.0, phi_pilot));
  const Eigen::VectorXcd y_mean =
      (sc.hw.A[std::size_t(m)].asDiagonal() * lk.h_bar) * mean_coef;
  return lk.h_bar * std::polar(1.0, phi_anchor) + ker.W_est * (y_pilot - y_mean);
}

inline std::vector<EstimationKernel> compute_kernels(const Scenario& sc) {
  std::vector<EstimationKernel> kers(std::size_t(sc.cfg.num_aps) *
                                     std::size_t(sc.cfg.num_ues));
  for (int m = 0; m < sc.cfg.num_aps; ++m)
    for (int k = 0; k < sc.cfg.num_ues; ++k)
      kers[std::size_t(m) * std::size_t(sc.cfg.num_ues) + std::size_t(k)] =
          compute_psi(sc, m, k);
  return kers;
}

inline const EstimationKernel& kernel_at(const std::vector<EstimationKernel>& kers,
                                         const Scenario& sc, int m, int k) {
  return kers[std::size_t(m) * std::size_t(sc.cfg.num_ues) + std::size_t(k)];
}

}  // namespace cfmimo
