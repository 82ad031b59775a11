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

#include "cfmimo/estimation.hpp"
#include "cfmimo/moments.hpp"
#include "cfmimo/scenario.hpp"

namespace cfmimo {

// Deterministic per-link moment cache. Every SINR ingredient is either a
// constant or exactly affine in the squared aging coefficients, so the cache
// stores (constant, rho^2-slope) pairs and instant-n evaluation is O(1) per
// scalar. Data powers are applied at assembly time, never baked in here.
struct TermCache {
  int M = 0, K = 0;

  // per (k,m)
  Eigen::MatrixXd tr_AG;     // tr(A Gamma_bar)
  Eigen::MatrixXd tr_GB;     // tr(Gamma_bar B)
  Eigen::MatrixXd tr_GAA;    // tr(Gamma_bar A A)
  Eigen::MatrixXd bu_base;   // E{|h_hat^H A h[anchor]|^2} - tr(A Gamma_bar)^2

  // per (k,i,m); co-pilot members carry the aging-sensitive pieces
  std::vector<Eigen::MatrixXd> t_cross;    // [k](i,m) tr(Gamma_bar A Rbar_i A)
  std::vector<Eigen::MatrixXd> g1;         // [k](i,m) pilot-quadratic, co-pilot only
  std::vector<Eigen::MatrixXcd> vcoh;      // [k](i,m) coherent cross-AP mean
  std::vector<Eigen::MatrixXd> rrf_c0, rrf_c2;  // receive-RF kernel pieces
  std::vector<Eigen::MatrixXd> adc_c0, adc_c2;  // ADC kernel pieces

  bool copilot(int k, int i) const { return copilot_mask[std::size_t(k) * K + i]; }
  std::vector<char> copilot_mask;
};

namespace detail {

struct AffineScalar {
  double c0 = 0.0;  // constant part
  double c2 = 0.0;  // coefficient of rho_eff^2
};

// E{ y^H L diag(h_i[n] h_i[n]^H) Rt y } split into constant and rho^2 slope,
// where y is the ADC-output pilot observation of UE i's co-pilot group and
// rho_eff = rho_i[anchor - pilot] * rho_i[n - anchor].
inline AffineScalar pilot_quadratic_diag(const Scenario& sc, int m, int i,
                                         const std::vector<int>& group,
                                         const Eigen::MatrixXcd& L,
                                         const Eigen::MatrixXcd& Rt) {
  const auto& cfg = sc.cfg;
  const Eigen::VectorXcd A = sc.hw.A[std::size_t(m)].cast<Cplx>();
  const double kr = sc.hw.kappa_r[std::size_t(m)];
  const Eigen::VectorXd Dw =
      sc.hw.B[std::size_t(m)] + kr * kr * sc.hw.A[std::size_t(m)];
  const auto& li = sc.link(m, i);
  const Eigen::VectorXcd dRi = li.R_bar.diagonal();

  AffineScalar out;
  const Eigen::MatrixXcd mid = L * dRi.asDiagonal() * Rt;  // L diag(Rbar_i) Rt
  for (int j : group) {
    const auto& lj = sc.link(m, j);
    const double w = (1.0 + cfg.kappa_t[std::size_t(j)] * cfg.kappa_t[std::size_t(j)]) *
                     sc.hw.alpha_d[std::size_t(j)] * cfg.pilot_power[std::size_t(j)];
    if (j != i) {
      out.c0 += w * (A.asDiagonal() * mid * A.asDiagonal() * lj.R_bar).trace().real();
      const Eigen::VectorXcd dj = (Dw.array() * lj.R_bar.diagonal().real().array())
                                      .matrix()
                                      .cast<Cplx>();
      out.c0 += w * (dj.asDiagonal() * mid).trace().real();
    } else {
      const double base =
          (A.asDiagonal() * mid * A.asDiagonal() * li.R_bar).trace().real();
      const double quart =
          quartic_diag(li.h_bar, li.R, A.asDiagonal() * L, Rt * A.asDiagonal()).real();
      out.c0 += w * base;
      out.c2 += w * (quart - base);
      const auto dd0 = double_diag_moment(li.h_bar, li.R, Dw, L, Rt, 0.0).real();
      const auto dd1 = double_diag_moment(li.h_bar, li.R, Dw, L, Rt, 1.0).real();
      out.c0 += w * dd0;
      out.c2 += w * (dd1 - dd0);
    }
  }
  out.c0 += cfg.noise_power * (mid * A.asDiagonal()).trace().real();
  return out;
}

// E{ y^H L (h_i[anchor] h_i[anchor]^H) Rt y }; no instant dependence.
inline double pilot_quadratic_full(const Scenario& sc, int m, int i,
                                   const std::vector<int>& group,
                                   const Eigen::MatrixXcd& L,
                                   const Eigen::MatrixXcd& Rt) {
  const auto& cfg = sc.cfg;
  const Eigen::VectorXcd A = sc.hw.A[std::size_t(m)].cast<Cplx>();
  const double kr = sc.hw.kappa_r[std::size_t(m)];
  const Eigen::VectorXd Dw =
      sc.hw.B[std::size_t(m)] + kr * kr * sc.hw.A[std::size_t(m)];
  const auto& li = sc.link(m, i);
  const double rho_t = sc.rho_pilot(i);

  double out = 0.0;
  const Eigen::MatrixXcd mid = L * li.R_bar * Rt;  // L Rbar_i Rt
  for (int j : group) {
    const auto& lj = sc.link(m, j);
    const double w = (1.0 + cfg.kappa_t[std::size_t(j)] * cfg.kappa_t[std::size_t(j)]) *
                     sc.hw.alpha_d[std::size_t(j)] * cfg.pilot_power[std::size_t(j)];
    if (j != i) {
      out += w * (A.asDiagonal() * mid * A.asDiagonal() * lj.R_bar).trace().real();
      const Eigen::VectorXcd dj = (Dw.array() * lj.R_bar.diagonal().real().array())
                                      .matrix()
                                      .cast<Cplx>();
      out += w * (dj.asDiagonal() * mid).trace().real();
    } else {
      out += w * lagged_full(li.h_bar, li.R, A.asDiagonal() * L, Rt * A.asDiagonal(),
                             rho_t)
                     .real();
      out += w * lagged_diag(li.h_bar, li.R,
                             Rt * Dw.cast<Cplx>().asDiagonal(), L, rho_t)
                     .real();
    }
  }
  out += cfg.noise_power * (mid * A.asDiagonal()).trace().real();
  return out;
}

}  // namespace detail

inline TermCache build_term_cache(const Scenario& sc,
                                  const std::vector<EstimationKernel>& kers) {
  const auto& cfg = sc.cfg;
  const int M = cfg.num_aps, K = cfg.num_ues;
  TermCache tc;
  tc.M = M;
  tc.K = K;
  tc.tr_AG.resize(K, M);
  tc.tr_GB.resize(K, M);
  tc.tr_GAA.resize(K, M);
  tc.bu_base.resize(K, M);
  tc.t_cross.assign(std::size_t(K), Eigen::MatrixXd::Zero(K, M));
  tc.g1.assign(std::size_t(K), Eigen::MatrixXd::Zero(K, M));
  tc.vcoh.assign(std::size_t(K), Eigen::MatrixXcd::Zero(K, M));
  tc.rrf_c0.assign(std::size_t(K), Eigen::MatrixXd::Zero(K, M));
  tc.rrf_c2.assign(std::size_t(K), Eigen::MatrixXd::Zero(K, M));
  tc.adc_c0.assign(std::size_t(K), Eigen::MatrixXd::Zero(K, M));
  tc.adc_c2.assign(std::size_t(K), Eigen::MatrixXd::Zero(K, M));
  tc.copilot_mask.assign(std::size_t(K) * K, 0);
  for (int k = 0; k < K; ++k)
    for (int i : sc.pilots.copilot[std::size_t(k)])
      tc.copilot_mask[std::size_t(k) * K + i] = 1;

  for (int m = 0; m < M; ++m) {
    const Eigen::VectorXcd A = sc.hw.A[std::size_t(m)].cast<Cplx>();
    const Eigen::VectorXcd B = sc.hw.B[std::size_t(m)].cast<Cplx>();
    for (int k = 0; k < K; ++k) {
      const auto& ker = kernel_at(kers, sc, m, k);
      const auto& group = sc.pilots.copilot[std::size_t(k)];
      tc.tr_AG(k, m) = (A.asDiagonal() * ker.Gamma_bar).trace().real();
      tc.tr_GB(k, m) = (ker.Gamma_bar * B.asDiagonal()).trace().real();
      tc.tr_GAA(k, m) =
          (ker.Gamma_bar * A.asDiagonal() * A.asDiagonal()).trace().real();

      const Eigen::MatrixXcd& P = ker.P;
      const Eigen::MatrixXcd PH = P.adjoint();
      const Eigen::MatrixXcd LB = ker.G * B.asDiagonal();
      const Eigen::MatrixXcd RtG = ker.W_est;  // = G^H

      for (int i = 0; i < K; ++i) {
        const auto& li = sc.link(m, i);
        tc.t_cross[std::size_t(k)](i, m) =
            (ker.Gamma_bar * A.asDiagonal() * li.R_bar * A.asDiagonal())
                .trace()
                .real();
        if (tc.copilot(k, i)) {
          tc.g1[std::size_t(k)](i, m) =
              detail::pilot_quadratic_full(sc, m, i, group, P, PH);
          tc.vcoh[std::size_t(k)](i, m) =
              sc.hw.alpha_d[std::size_t(i)] *
              std::sqrt(cfg.pilot_power[std::size_t(i)]) * sc.rho_pilot(i) *
              (P * li.R_bar * A.asDiagonal()).trace();
          const auto rrf = detail::pilot_quadratic_diag(sc, m, i, group, P, PH);
          tc.rrf_c0[std::size_t(k)](i, m) = rrf.c0;
          tc.rrf_c2[std::size_t(k)](i, m) = rrf.c2;
          const auto adc = detail::pilot_quadratic_diag(sc, m, i, group, LB, RtG);
          tc.adc_c0[std::size_t(k)](i, m) = adc.c0;
          tc.adc_c2[std::size_t(k)](i, m) = adc.c2;
        } else {
          // uncorrelated with the pilot observation: plain second moments
          tc.rrf_c0[std::size_t(k)](i, m) =
              (ker.Gamma_bar * A.asDiagonal() *
               li.R_bar.diagonal().asDiagonal() * A.asDiagonal())
                  .trace()
                  .real();
          tc.adc_c0[std::size_t(k)](i, m) =
              (ker.Gamma_bar * B.asDiagonal() * li.R_bar.diagonal().asDiagonal())
                  .trace()
                  .real();
        }
      }
      tc.bu_base(k, m) =
          tc.g1[std::size_t(k)](k, m) - tc.tr_AG(k, m) * tc.tr_AG(k, m);
    }
  }
  return tc;
}

// Instant-n term matrices for one UE, powers applied per the SINR layout.
struct SETermSet {
  int k = 0;
  int n = 0;  // 1-based instant, n >= anchor
  Eigen::VectorXcd delta;               // length M
  Eigen::VectorXd B;                    // beamforming-uncertainty diagonal
  Eigen::VectorXd Lambda;               // channel-aging diagonal
  std::vector<Eigen::MatrixXcd> C;      // per i, power-free kernel
  std::vector<Eigen::VectorXd> D;       // per i, receive-RF diagonal (power applied)
  std::vector<Eigen::VectorXd> Dbar;    // per i, ADC diagonal (power applied)
  Eigen::VectorXd adc_const;            // sigma^2 tr(Gamma_bar B_m)
  Eigen::VectorXd Q;                    // noise diagonal tr(Gamma_bar A A)
};

inline SETermSet compute_se_terms(const Scenario& sc, const TermCache& tc,
                                  const Eigen::VectorXd& p, int k, int n) {
  const auto& cfg = sc.cfg;
  if (n < cfg.anchor_instant() || n > cfg.tau_c)
    throw std::domain_error("compute_se_terms: instant outside data phase");
  const int M = tc.M, K = tc.K;
  SETermSet t;
  t.k = k;
  t.n = n;
  const double rho_n = sc.rho_data(k, n);
  const double rho_bar2 = 1.0 - rho_n * rho_n;
  const double ak = sc.hw.alpha_d[std::size_t(k)];
  const double pk = p(k);

  t.delta.resize(M);
  t.B.resize(M);
  t.Lambda.resize(M);
  t.adc_const.resize(M);
  t.Q.resize(M);
  for (int m = 0; m < M; ++m) {
    t.delta(m) = rho_n * tc.tr_AG(k, m);
    t.B(m) = ak * ak * pk * rho_n * rho_n * tc.bu_base(k, m);
    t.Lambda(m) = ak * ak * pk * rho_bar2 * tc.t_cross[std::size_t(k)](k, m);
    t.adc_const(m) = cfg.noise_power * tc.tr_GB(k, m);
    t.Q(m) = tc.tr_GAA(k, m);
  }

  t.C.resize(std::size_t(K));
  t.D.resize(std::size_t(K));
  t.Dbar.resize(std::size_t(K));
  for (int i = 0; i < K; ++i) {
    const double kt2 = cfg.kappa_t[std::size_t(i)] * cfg.kappa_t[std::size_t(i)];
    const double ai = sc.hw.alpha_d[std::size_t(i)];
    const double wi = (1.0 + kt2) * ai * p(i);
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(M, M);
    Eigen::VectorXd D(M), Dbar(M);
    if (tc.copilot(k, i)) {
      const double rho_ni = sc.rho_data(i, n);
      const double rn2 = rho_ni * rho_ni;
      const double rt = sc.rho_pilot(i);
      const double reff2 = rt * rt * rn2;
      for (int m = 0; m < M; ++m) {
        const double tc_im = tc.t_cross[std::size_t(k)](i, m);
        C(m, m) = tc_im + rn2 * (tc.g1[std::size_t(k)](i, m) - tc_im);
        const double kr2 =
            sc.hw.kappa_r[std::size_t(m)] * sc.hw.kappa_r[std::size_t(m)];
        D(m) = kr2 * wi *
               (tc.rrf_c0[std::size_t(k)](i, m) + reff2 * tc.rrf_c2[std::size_t(k)](i, m));
        Dbar(m) = (1.0 + kr2) * wi *
                  (tc.adc_c0[std::size_t(k)](i, m) + reff2 * tc.adc_c2[std::size_t(k)](i, m));
      }
      for (int m = 0; m < M; ++m)
        for (int mp = 0; mp < M; ++mp)
          if (m != mp)
            C(m, mp) = rn2 * tc.vcoh[std::size_t(k)](i, m) *
                       std::conj(tc.vcoh[std::size_t(k)](i, mp));
    } else {
      for (int m = 0; m < M; ++m) {
        C(m, m) = tc.t_cross[std::size_t(k)](i, m);
        const double kr2 =
            sc.hw.kappa_r[std::size_t(m)] * sc.hw.kappa_r[std::size_t(m)];
        D(m) = kr2 * wi * tc.rrf_c0[std::size_t(k)](i, m);
        Dbar(m) = (1.0 + kr2) * wi * tc.adc_c0[std::size_t(k)](i, m);
      }
    }
    t.C[std::size_t(i)] = std::move(C);
    t.D[std::size_t(i)] = std::move(D);
    t.Dbar[std::size_t(i)] = std::move(Dbar);
  }
  return t;
}

// Interference-plus-noise matrix of the quadratic form in the LSFD weights.
inline Eigen::MatrixXcd omega_matrix(const Scenario& sc, const SETermSet& t,
                                     const Eigen::VectorXd& p) {
  const int M = int(t.delta.size());
  const int K = int(t.C.size());
  Eigen::MatrixXcd omega = Eigen::MatrixXcd::Zero(M, M);
  omega += (t.B + t.Lambda + t.adc_const + sc.cfg.noise_power * t.Q)
               .cast<Cplx>()
               .asDiagonal();
  for (int i = 0; i < K; ++i) {
    const double ai = sc.hw.alpha_d[std::size_t(i)];
    const double kt2 = sc.cfg.kappa_t[std::size_t(i)] * sc.cfg.kappa_t[std::size_t(i)];
    double cw = (1.0 - ai + kt2) * ai * p(i);  // DAC + transmit-RF reuse of C
    if (i != t.k) cw += ai * ai * p(i);        // inter-user interference
    if (cw != 0.0) omega += cw * t.C[std::size_t(i)];
    omega += (t.D[std::size_t(i)] + t.Dbar[std::size_t(i)]).cast<Cplx>().asDiagonal();
  }
  return omega;
}

struct SinrParts {
  double delta = 0.0;  // desired-signal power
  double omega = 0.0;  // interference-plus-noise power
  double sinr = 0.0;
};

inline SinrParts assemble_sinr(const Scenario& sc, const SETermSet& t,
                               const Eigen::VectorXd& p, const Eigen::VectorXcd& a) {
  if (a.size() != t.delta.size())
    throw std::invalid_argument("assemble_sinr: weight length mismatch");
  if (a.isZero(0.0))
    throw std::invalid_argument("assemble_sinr: all-zero LSFD weights");
  const double ak = sc.hw.alpha_d[std::size_t(t.k)];
  SinrParts out;
  const Cplx num = a.dot(t.delta);  // a^H delta
  out.delta = ak * ak * p(t.k) * std::norm(num);
  const Eigen::MatrixXcd omega = omega_matrix(sc, t, p);
  out.omega = (a.adjoint() * omega * a).value().real();
  if (!(out.omega > 0.0))
    throw std::runtime_error("assemble_sinr: non-positive denominator");
  out.sinr = out.delta / out.omega;
  return out;
}

// Optimal second-layer weights: a = Omega^{-1} delta (any scaling).
inline Eigen::VectorXcd optimal_lsfd(const Scenario& sc, const SETermSet& t,
                                     const Eigen::VectorXd& p) {
  const Eigen::MatrixXcd omega = omega_matrix(sc, t, p);
  return omega.ldlt().solve(t.delta);
}

inline Eigen::VectorXcd sld_weights(int M) { return Eigen::VectorXcd::Ones(M); }

enum class WeightMode { kOptimal, kSld };

// Per-term powers in the simulated-SINR grouping, for breakdowns and the
// Monte Carlo cross-check.
struct TermPowers {
  double ds = 0.0, bu = 0.0, ca = 0.0, dac = 0.0, trf = 0.0, rrf = 0.0,
         adc = 0.0, ns = 0.0;
  Eigen::VectorXd iui;  // per interferer, zero at i == k
  double iui_total() const { return iui.sum(); }
  double sinr() const {
    return ds / (bu + ca + iui_total() + dac + trf + rrf + adc + ns);
  }
};

inline TermPowers term_powers(const Scenario& sc, const SETermSet& t,
                              const Eigen::VectorXd& p, const Eigen::VectorXcd& a) {
  const int K = int(t.C.size());
  TermPowers tp;
  tp.iui = Eigen::VectorXd::Zero(K);
  const double ak = sc.hw.alpha_d[std::size_t(t.k)];
  tp.ds = ak * ak * p(t.k) * std::norm(a.dot(t.delta));
  auto quad_diag = [&](const Eigen::VectorXd& d) {
    return (a.cwiseAbs2().array() * d.array()).sum();
  };
  auto quad = [&](const Eigen::MatrixXcd& m) {
    return (a.adjoint() * m * a).value().real();
  };
  tp.bu = quad_diag(t.B);
  tp.ca = quad_diag(t.Lambda);
  tp.ns = sc.cfg.noise_power * quad_diag(t.Q);
  tp.adc = quad_diag(t.adc_const);
  for (int i = 0; i < K; ++i) {
    const double ai = sc.hw.alpha_d[std::size_t(i)];
    const double kt2 = sc.cfg.kappa_t[std::size_t(i)] * sc.cfg.kappa_t[std::size_t(i)];
    const double cq = quad(t.C[std::size_t(i)]);
    if (i != t.k) tp.iui(i) = ai * ai * p(i) * cq;
    tp.dac += (1.0 - ai) * ai * p(i) * cq;
    tp.trf += kt2 * ai * p(i) * cq;
    tp.rrf += quad_diag(t.D[std::size_t(i)]);
    tp.adc += quad_diag(t.Dbar[std::size_t(i)]);
  }
  return tp;
}

// Closed-form SINR table over all UEs and data instants.
struct ScenarioSE {
  Eigen::MatrixXd sinr;                       // K x data-instants
  std::vector<Eigen::VectorXcd> weights;      // per (k, n), row-major k * D + d
  double sum_se = 0.0;                        // bits/s/Hz
};

inline double se_from_sinr(const Eigen::MatrixXd& sinr, int tau_c) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < sinr.size(); ++i)
    acc += std::log2(1.0 + *(sinr.data() + i));
  return acc / double(tau_c);
}

inline ScenarioSE closed_form_se(const Scenario& sc, const TermCache& tc,
                                 const Eigen::VectorXd& p, WeightMode mode) {
  const auto& cfg = sc.cfg;
  const int K = cfg.num_ues;
  const int D = cfg.num_data_instants();
  ScenarioSE out;
  out.sinr.resize(K, D);
  out.weights.resize(std::size_t(K) * D);
  for (int k = 0; k < K; ++k) {
    for (int d = 0; d < D; ++d) {
      const int n = cfg.anchor_instant() + d;
      const SETermSet t = compute_se_terms(sc, tc, p, k, n);
      Eigen::VectorXcd a = (mode == WeightMode::kOptimal) ? optimal_lsfd(sc, t, p)
                                                          : sld_weights(tc.M);
      out.sinr(k, d) = assemble_sinr(sc, t, p, a).sinr;
      out.weights[std::size_t(k) * D + std::size_t(d)] = std::move(a);
    }
  }
  out.sum_se = se_from_sinr(out.sinr, cfg.tau_c);
  return out;
}

// Independently coded scalar SINR for the uncorrelated-Rayleigh, ideal-
// hardware reduction. gamma_bar is the per-antenna estimate variance
// pp_k rho_p^2 beta^2 / (sum_{j in group} pp_j beta_j + sigma^2).
inline double rayleigh_ideal_sinr(const Scenario& sc, const Eigen::VectorXd& p,
                                  int k, int n, const Eigen::VectorXcd& a) {
  const auto& cfg = sc.cfg;
  const int M = cfg.num_aps, N = cfg.num_antennas;
  const double sigma2 = cfg.noise_power;
  auto gamma_bar = [&](int m, int i) {
    double den = sigma2;
    for (int j : sc.pilots.copilot[std::size_t(i)])
      den += cfg.pilot_power[std::size_t(j)] * sc.link(m, j).beta;
    const double rp = sc.rho_pilot(i);
    const double b = sc.link(m, i).beta;
    return cfg.pilot_power[std::size_t(i)] * rp * rp * b * b / den;
  };
  const double rho_n = sc.rho_data(k, n);
  Cplx num_sum = 0.0;
  for (int m = 0; m < M; ++m) num_sum += std::conj(a(m)) * double(N) * gamma_bar(m, k);
  const double num = p(k) * rho_n * rho_n * std::norm(num_sum);

  double den = 0.0;
  for (int i = 0; i < cfg.num_ues; ++i)
    for (int m = 0; m < M; ++m)
      den += std::norm(a(m)) * p(i) * double(N) * gamma_bar(m, k) * sc.link(m, i).beta;
  for (int i : sc.pilots.copilot[std::size_t(k)]) {
    if (i == k) continue;
    const double rho_ni = sc.rho_data(i, n);
    Cplx coh = 0.0;
    for (int m = 0; m < M; ++m)
      coh += std::conj(a(m)) * std::sqrt(gamma_bar(m, k) * gamma_bar(m, i));
    den += double(N) * double(N) * p(i) * rho_ni * rho_ni * std::norm(coh);
  }
  for (int m = 0; m < M; ++m)
    den += sigma2 * std::norm(a(m)) * double(N) * gamma_bar(m, k);
  return num / den;
}

// Least-squares fit of the co-pilot interference power against the squared
// aging coefficient of the interferer: IUI_{ki,n} = e2 + e4 rho_i^2[n-anchor].
struct AgingFit {
  double e2 = 0.0;
  double e4 = 0.0;
  double max_rel_residual = 0.0;
};

inline AgingFit iui_aging_coefficients(const Scenario& sc, const TermCache& tc,
                                       const Eigen::VectorXd& p, int k, int i,
                                       const Eigen::VectorXcd& a) {
  const auto& cfg = sc.cfg;
  const int D = cfg.num_data_instants();
  Eigen::VectorXd x(D), y(D);
  for (int d = 0; d < D; ++d) {
    const int n = cfg.anchor_instant() + d;
    const double r = sc.rho_data(i, n);
    x(d) = r * r;
    y(d) = term_powers(sc, compute_se_terms(sc, tc, p, k, n), p, a).iui(i);
  }
  AgingFit fit;
  const double xm = x.mean(), ym = y.mean();
  const double sxx = (x.array() - xm).square().sum();
  if (sxx < 1e-30) {  // static interferer: constant fit
    fit.e2 = ym;
    fit.e4 = 0.0;
  } else {
    fit.e4 = ((x.array() - xm) * (y.array() - ym)).sum() / sxx;
    fit.e2 = ym - fit.e4 * xm;
  }
  const double scale = y.cwiseAbs().maxCoeff() + 1e-300;
  for (int d = 0; d < D; ++d)
    fit.max_rel_residual =
        std::max(fit.max_rel_residual, std::abs(fit.e2 + fit.e4 * x(d) - y(d)) / scale);
  return fit;
}

}  // namespace cfmimo
