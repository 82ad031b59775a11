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
#include <vector>

#include <Eigen/Dense>

#include "cfmimo/estimation.hpp"
#include "cfmimo/moments.hpp"
#include "cfmimo/parallel.hpp"
#include "cfmimo/rng.hpp"
#include "cfmimo/scenario.hpp"

namespace cfmimo {

// Full receive-chain simulation: pilot transmission, LMMSE estimation from the
// realized signals, data transmission with every distortion stage sampled, and
// two-layer combining. Each contribution to the combined signal is kept
// separate so the per-term powers can be accumulated individually.
//
// The UE pilot distortion is drawn independently per AP, matching the
// spatially-uncorrelated treatment of the analytical cross-AP terms; data-phase
// UE distortions are a single realization seen by all APs.

struct McTermMeans {
  Eigen::MatrixXd ds;   // analytic desired-signal power (K x D)
  Eigen::MatrixXd bu, ca, dac, trf, rrf, adc, ns;  // sample means (K x D)
  std::vector<Eigen::MatrixXd> iui;  // per interferer i: (K x D)
  long trials = 0;

  double denominator(int k, int d) const {
    double s = bu(k, d) + ca(k, d) + dac(k, d) + trf(k, d) + rrf(k, d) +
               adc(k, d) + ns(k, d);
    for (const auto& m : iui) s += m(k, d);
    return s;
  }
  double sinr(int k, int d) const { return ds(k, d) / denominator(k, d); }
  Eigen::MatrixXd sinr_table() const {
    Eigen::MatrixXd out(ds.rows(), ds.cols());
    for (int k = 0; k < ds.rows(); ++k)
      for (int d = 0; d < ds.cols(); ++d) out(k, d) = sinr(k, d);
    return out;
  }
};

namespace detail {

struct McAccum {
  // flattened (k, d) running sums
  std::vector<KahanSum> bu, ca, dac, trf, rrf, adc, ns;
  std::vector<KahanSum> iui;  // (k, d, i)
  long trials = 0;

  void init(int K, int D) {
    bu.assign(std::size_t(K) * D, {});
    ca.assign(std::size_t(K) * D, {});
    dac.assign(std::size_t(K) * D, {});
    trf.assign(std::size_t(K) * D, {});
    rrf.assign(std::size_t(K) * D, {});
    adc.assign(std::size_t(K) * D, {});
    ns.assign(std::size_t(K) * D, {});
    iui.assign(std::size_t(K) * D * K, {});
  }
  void merge(const McAccum& o) {
    auto m = [](std::vector<KahanSum>& a, const std::vector<KahanSum>& b) {
      for (std::size_t i = 0; i < a.size(); ++i) a[i].merge(b[i]);
    };
    m(bu, o.bu);
    m(ca, o.ca);
    m(dac, o.dac);
    m(trf, o.trf);
    m(rrf, o.rrf);
    m(adc, o.adc);
    m(ns, o.ns);
    m(iui, o.iui);
    trials += o.trials;
  }
};

struct TrialWorkspace {
  std::vector<Eigen::MatrixXcd> anchor;   // per m: N x K
  std::vector<Eigen::MatrixXcd> hhat;     // per m: N x K (estimates)
  std::vector<Eigen::MatrixXcd> ghat;     // per m: conj(A o hhat), N x K
  std::vector<Eigen::MatrixXcd> chan;     // per m: N x K channel at instant n
  std::vector<Eigen::MatrixXcd> innov;    // per m: N x K innovation at n
  Eigen::MatrixXcd bu_dev;                // M x K: hhat^H A h[anchor] - tr(A Gamma)
  Eigen::VectorXcd y, eta, z, nq, tmp;
  Eigen::VectorXd W;
  Eigen::MatrixXcd comb;                  // K x K weighted sums over APs
  Eigen::VectorXcd comb_ca, comb_rrf, comb_adc, comb_ns, comb_bu;
  std::vector<std::complex<double>> ups, xi;  // data-phase UE distortions
};

}  // namespace detail

inline McTermMeans run_monte_carlo(const Scenario& sc,
                                   const std::vector<EstimationKernel>& kers,
                                   const std::vector<Eigen::VectorXcd>& weights,
                                   const Eigen::VectorXd& p, long trials,
                                   unsigned threads, std::uint64_t stream_salt = 0x3c) {
  const auto& cfg = sc.cfg;
  const int M = cfg.num_aps, K = cfg.num_ues, N = cfg.num_antennas;
  const int D = cfg.num_data_instants();
  const int lambda = cfg.anchor_instant();
  const double sigma2 = cfg.noise_power;

  Eigen::MatrixXd tr_AG(K, M);
  for (int m = 0; m < M; ++m)
    for (int k = 0; k < K; ++k)
      tr_AG(k, m) = (sc.hw.A[std::size_t(m)].cast<Cplx>().asDiagonal() *
                     kernel_at(kers, sc, m, k).Gamma_bar)
                        .trace()
                        .real();

  const long shard_size = 256;
  const std::size_t num_shards = std::size_t((trials + shard_size - 1) / shard_size);
  std::vector<detail::McAccum> shards(num_shards);

  parallel_shards(num_shards, threads, [&](std::size_t s) {
    detail::McAccum& acc = shards[s];
    acc.init(K, D);
    detail::TrialWorkspace w;
    w.anchor.assign(std::size_t(M), Eigen::MatrixXcd(N, K));
    w.hhat.assign(std::size_t(M), Eigen::MatrixXcd(N, K));
    w.ghat.assign(std::size_t(M), Eigen::MatrixXcd(N, K));
    w.chan.assign(std::size_t(M), Eigen::MatrixXcd(N, K));
    w.innov.assign(std::size_t(M), Eigen::MatrixXcd(N, K));
    w.bu_dev.resize(M, K);
    w.y.resize(N);
    w.eta.resize(N);
    w.z.resize(N);
    w.nq.resize(N);
    w.tmp.resize(N);
    w.W.resize(N);
    w.comb.resize(K, K);
    w.comb_ca.resize(K);
    w.comb_rrf.resize(K);
    w.comb_adc.resize(K);
    w.comb_ns.resize(K);
    w.comb_bu.resize(K);
    w.ups.resize(std::size_t(K));
    w.xi.resize(std::size_t(K));

    const long t0 = long(s) * shard_size;
    const long t1 = std::min<long>(trials, t0 + shard_size);
    for (long trial = t0; trial < t1; ++trial) {
      RngStream rng(cfg.seed, stream_salt, std::uint64_t(trial));

      // anchor channels
      for (int m = 0; m < M; ++m)
        for (int k = 0; k < K; ++k)
          w.anchor[std::size_t(m)].col(k) =
              sample_rician(sc.link(m, k).h_bar, sc.link(m, k).sqrt_R, rng);

      // pilot phase + estimation, one observation per (AP, pilot group)
      for (int m = 0; m < M; ++m) {
        const Eigen::VectorXd& A = sc.hw.A[std::size_t(m)];
        const Eigen::VectorXd& B = sc.hw.B[std::size_t(m)];
        const double kr = sc.hw.kappa_r[std::size_t(m)];
        for (int g = 0; g < cfg.tau_p; ++g) {
          const auto& group = sc.pilots.group[std::size_t(g)];
          if (group.empty()) continue;
          w.y.setZero();
          w.W.setZero();
          for (int i : group) {
            const double rho_t = sc.rho_pilot(i);
            const Eigen::VectorXcd h_t = rho_t * w.anchor[std::size_t(m)].col(i) +
                                         std::sqrt(1.0 - rho_t * rho_t) *
                                             sample_rician(sc.link(m, i).h_bar,
                                                           sc.link(m, i).sqrt_R, rng);
            const double pp = cfg.pilot_power[std::size_t(i)];
            const double ai = sc.hw.alpha_d[std::size_t(i)];
            const double kt = cfg.kappa_t[std::size_t(i)];
            std::complex<double> s = ai * std::sqrt(pp);
            const double v_dac = ai * (1.0 - ai) * pp;
            const double v_rf = kt * kt * ai * pp;
            if (v_dac > 0) s += std::sqrt(v_dac) * rng.cnormal();
            if (v_rf > 0) s += std::sqrt(v_rf) * rng.cnormal();
            w.y += h_t * s;
            w.W += (1.0 + kt * kt) * ai * pp * h_t.cwiseAbs2();
          }
          for (int l = 0; l < N; ++l) {
            const double wv = w.W(l);
            std::complex<double> rf = w.y(l);
            if (kr > 0) rf += std::sqrt(kr * kr * wv) * rng.cnormal();
            rf += std::sqrt(sigma2) * rng.cnormal();
            const double qvar = B(l) * ((1.0 + kr * kr) * wv + sigma2);
            w.y(l) = A(l) * rf;
            if (qvar > 0) w.y(l) += std::sqrt(qvar) * rng.cnormal();
          }
          for (int k : group)
            w.hhat[std::size_t(m)].col(k) = kernel_at(kers, sc, m, k).W_est * w.y;
        }
        for (int k = 0; k < K; ++k) {
          w.ghat[std::size_t(m)].col(k) =
              (A.cast<Cplx>().asDiagonal() * w.hhat[std::size_t(m)].col(k)).conjugate();
          w.bu_dev(m, k) = (w.ghat[std::size_t(m)].col(k).transpose() *
                            w.anchor[std::size_t(m)].col(k))
                               .value() -
                           Cplx(tr_AG(k, m), 0.0);
        }
      }

      // data phase
      for (int d = 0; d < D; ++d) {
        const int n = lambda + d;
        for (int i = 0; i < K; ++i) {
          const double ai = sc.hw.alpha_d[std::size_t(i)];
          const double kt = cfg.kappa_t[std::size_t(i)];
          const double v_dac = (1.0 - ai) * ai * p(i);
          const double v_rf = kt * kt * ai * p(i);
          w.ups[std::size_t(i)] =
              v_dac > 0 ? std::sqrt(v_dac) * rng.cnormal() : Cplx(0, 0);
          w.xi[std::size_t(i)] =
              v_rf > 0 ? std::sqrt(v_rf) * rng.cnormal() : Cplx(0, 0);
        }
        w.comb.setZero();
        w.comb_ca.setZero();
        w.comb_rrf.setZero();
        w.comb_adc.setZero();
        w.comb_ns.setZero();
        w.comb_bu.setZero();

        for (int m = 0; m < M; ++m) {
          const Eigen::VectorXd& A = sc.hw.A[std::size_t(m)];
          const Eigen::VectorXd& B = sc.hw.B[std::size_t(m)];
          const double kr = sc.hw.kappa_r[std::size_t(m)];
          w.W.setZero();
          for (int i = 0; i < K; ++i) {
            const double rho_n = sc.rho_data(i, n);
            w.innov[std::size_t(m)].col(i) =
                sample_rician(sc.link(m, i).h_bar, sc.link(m, i).sqrt_R, rng);
            w.chan[std::size_t(m)].col(i) =
                rho_n * w.anchor[std::size_t(m)].col(i) +
                std::sqrt(1.0 - rho_n * rho_n) * w.innov[std::size_t(m)].col(i);
            const double kt = cfg.kappa_t[std::size_t(i)];
            w.W += (1.0 + kt * kt) * sc.hw.alpha_d[std::size_t(i)] * p(i) *
                   w.chan[std::size_t(m)].col(i).cwiseAbs2();
          }
          for (int l = 0; l < N; ++l) {
            const double wv = w.W(l);
            w.eta(l) = kr > 0 ? std::sqrt(kr * kr * wv) * rng.cnormal() : Cplx(0, 0);
            w.z(l) = std::sqrt(sigma2) * rng.cnormal();
            const double qvar = B(l) * ((1.0 + kr * kr) * wv + sigma2);
            w.nq(l) = qvar > 0 ? std::sqrt(qvar) * rng.cnormal() : Cplx(0, 0);
          }
          // combine per UE with this AP's weight
          for (int k = 0; k < K; ++k) {
            const Cplx ak = std::conj(weights[std::size_t(k) * D + std::size_t(d)](m));
            const auto gh = w.ghat[std::size_t(m)].col(k);
            for (int i = 0; i < K; ++i)
              w.comb(k, i) += ak * (gh.transpose() * w.chan[std::size_t(m)].col(i)).value();
            w.comb_ca(k) += ak * (gh.transpose() * w.innov[std::size_t(m)].col(k)).value();
            w.comb_rrf(k) += ak * (gh.transpose() * w.eta).value();
            w.comb_ns(k) += ak * (gh.transpose() * w.z).value();
            w.comb_adc(k) +=
                ak * (w.hhat[std::size_t(m)].col(k).dot(w.nq));
            w.comb_bu(k) += ak * w.bu_dev(m, k);
          }
        }
        for (int k = 0; k < K; ++k) {
          const double akd = sc.hw.alpha_d[std::size_t(k)];
          const double rho_n = sc.rho_data(k, n);
          const double rho_bar = std::sqrt(std::max(0.0, 1.0 - rho_n * rho_n));
          const std::size_t kd = std::size_t(k) * D + std::size_t(d);
          acc.bu[kd].add(std::norm(akd * rho_n * std::sqrt(p(k)) * w.comb_bu(k)));
          acc.ca[kd].add(std::norm(akd * rho_bar * std::sqrt(p(k)) * w.comb_ca(k)));
          Cplx dac_s = 0.0, trf_s = 0.0;
          for (int i = 0; i < K; ++i) {
            dac_s += w.comb(k, i) * w.ups[std::size_t(i)];
            trf_s += w.comb(k, i) * w.xi[std::size_t(i)];
            if (i != k)
              acc.iui[(kd)*std::size_t(K) + std::size_t(i)].add(std::norm(
                  sc.hw.alpha_d[std::size_t(i)] * std::sqrt(p(i)) * w.comb(k, i)));
          }
          acc.dac[kd].add(std::norm(dac_s));
          acc.trf[kd].add(std::norm(trf_s));
          acc.rrf[kd].add(std::norm(w.comb_rrf(k)));
          acc.adc[kd].add(std::norm(w.comb_adc(k)));
          acc.ns[kd].add(std::norm(w.comb_ns(k)));
        }
      }
      acc.trials += 1;
    }
  });

  detail::McAccum total;
  total.init(K, D);
  for (const auto& s : shards) total.merge(s);

  McTermMeans out;
  const double inv = 1.0 / double(total.trials);
  auto mat = [&](const std::vector<KahanSum>& v) {
    Eigen::MatrixXd m(K, D);
    for (int k = 0; k < K; ++k)
      for (int d = 0; d < D; ++d) m(k, d) = v[std::size_t(k) * D + d].value() * inv;
    return m;
  };
  out.bu = mat(total.bu);
  out.ca = mat(total.ca);
  out.dac = mat(total.dac);
  out.trf = mat(total.trf);
  out.rrf = mat(total.rrf);
  out.adc = mat(total.adc);
  out.ns = mat(total.ns);
  out.iui.assign(std::size_t(K), Eigen::MatrixXd::Zero(K, D));
  for (int k = 0; k < K; ++k)
    for (int d = 0; d < D; ++d)
      for (int i = 0; i < K; ++i)
        out.iui[std::size_t(i)](k, d) =
            total.iui[(std::size_t(k) * D + d) * K + std::size_t(i)].value() * inv;
  out.trials = total.trials;

  // desired-signal power from the analytic first moment (use-and-forget bound)
  out.ds.resize(K, D);
  for (int k = 0; k < K; ++k) {
    for (int d = 0; d < D; ++d) {
      const int n = lambda + d;
      const double rho_n = sc.rho_data(k, n);
      Cplx s = 0.0;
      for (int m = 0; m < M; ++m)
        s += std::conj(weights[std::size_t(k) * D + std::size_t(d)](m)) * tr_AG(k, m);
      const double akd = sc.hw.alpha_d[std::size_t(k)];
      out.ds(k, d) = akd * akd * p(k) * rho_n * rho_n * std::norm(s);
    }
  }
  return out;
}

inline double mc_sum_se(const McTermMeans& mc, int tau_c) {
  double acc = 0.0;
  for (int k = 0; k < mc.ds.rows(); ++k)
    for (int d = 0; d < mc.ds.cols(); ++d) acc += std::log2(1.0 + mc.sinr(k, d));
  return acc / double(tau_c);
}

// Second-layer combining at the CPU: s_hat = sum_m conj(a_m) s_m.
inline std::complex<double> lsfd_combine(const Eigen::VectorXcd& per_ap,
                                         const Eigen::VectorXcd& weights) {
  return weights.dot(per_ap);
}

// One AP's first-layer combining at a data instant, with the whole distortion
// chain sampled. channels: N x K realized channels at the instant; estimates:
// N x K anchor-instant estimates. Returns the per-UE combined scalars.
inline Eigen::VectorXcd simulate_data_instant(const Scenario& sc, int m,
                                              const Eigen::MatrixXcd& channels,
                                              const Eigen::MatrixXcd& estimates,
                                              const Eigen::VectorXd& p,
                                              const Eigen::VectorXcd& symbols,
                                              RngStream& rng) {
  const auto& cfg = sc.cfg;
  const int N = cfg.num_antennas, K = cfg.num_ues;
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(N);
  Eigen::VectorXd W = Eigen::VectorXd::Zero(N);
  for (int i = 0; i < K; ++i) {
    const std::complex<double> s =
        distort_ue_transmit(symbols(i), p(i), sc.hw.alpha_d[std::size_t(i)],
                            cfg.kappa_t[std::size_t(i)], rng);
    y += channels.col(i) * s;
    const double kt = cfg.kappa_t[std::size_t(i)];
    W += (1.0 + kt * kt) * sc.hw.alpha_d[std::size_t(i)] * p(i) *
         channels.col(i).cwiseAbs2();
  }
  const Eigen::VectorXcd y_adc =
      distort_ap_receive(y, sc.hw.kappa_r[std::size_t(m)], sc.hw.A[std::size_t(m)],
                         W, cfg.noise_power, rng);
  Eigen::VectorXcd out(K);
  for (int k = 0; k < K; ++k) out(k) = estimates.col(k).dot(y_adc);
  return out;
}

// Single pilot observation for one AP and one co-pilot group, exposing the
// anchors and LoS phases so estimator contracts can be checked empirically.
struct PilotDraw {
  Eigen::VectorXcd y;                    // ADC output at the group's instant
  Eigen::MatrixXcd anchors;              // N x group-size, h[anchor] per member
  std::vector<double> phi_anchor;        // realized anchor LoS phase per member
  std::vector<double> phi_pilot;         // realized pilot-instant LoS phase
};

inline PilotDraw draw_pilot_observation(const Scenario& sc, int m, int group_idx,
                                        RngStream& rng) {
  const auto& cfg = sc.cfg;
  const auto& group = sc.pilots.group[std::size_t(group_idx)];
  const int N = cfg.num_antennas;
  PilotDraw out;
  out.y = Eigen::VectorXcd::Zero(N);
  out.anchors.resize(N, Eigen::Index(group.size()));
  out.phi_anchor.resize(group.size());
  out.phi_pilot.resize(group.size());
  Eigen::VectorXd W = Eigen::VectorXd::Zero(N);
  for (std::size_t gi = 0; gi < group.size(); ++gi) {
    const int i = group[gi];
    const auto& li = sc.link(m, i);
    const double phiA = rng.phase();
    Eigen::VectorXcd g(N);
    for (int l = 0; l < N; ++l) g(l) = rng.cnormal();
    const Eigen::VectorXcd hA = li.h_bar * std::polar(1.0, phiA) + li.sqrt_R * g;
    out.anchors.col(Eigen::Index(gi)) = hA;
    out.phi_anchor[gi] = phiA;
    const double phiP = rng.phase();
    out.phi_pilot[gi] = phiP;
    Eigen::VectorXcd f(N);
    for (int l = 0; l < N; ++l) f(l) = rng.cnormal();
    const double rho_t = sc.rho_pilot(i);
    const Eigen::VectorXcd h_t =
        rho_t * hA + std::sqrt(1.0 - rho_t * rho_t) *
                         (li.h_bar * std::polar(1.0, phiP) + li.sqrt_R * f);
    const double pp = cfg.pilot_power[std::size_t(i)];
    const double ai = sc.hw.alpha_d[std::size_t(i)];
    const double kt = cfg.kappa_t[std::size_t(i)];
    std::complex<double> s = ai * std::sqrt(pp);
    const double v_dac = ai * (1.0 - ai) * pp;
    const double v_rf = kt * kt * ai * pp;
    if (v_dac > 0) s += std::sqrt(v_dac) * rng.cnormal();
    if (v_rf > 0) s += std::sqrt(v_rf) * rng.cnormal();
    out.y += h_t * s;
    W += (1.0 + kt * kt) * ai * pp * h_t.cwiseAbs2();
  }
  const Eigen::VectorXd& A = sc.hw.A[std::size_t(m)];
  const Eigen::VectorXd& B = sc.hw.B[std::size_t(m)];
  const double kr = sc.hw.kappa_r[std::size_t(m)];
  for (int l = 0; l < cfg.num_antennas; ++l) {
    std::complex<double> rf = out.y(l);
    if (kr > 0) rf += std::sqrt(kr * kr * W(l)) * rng.cnormal();
    rf += std::sqrt(cfg.noise_power) * rng.cnormal();
    const double qvar = B(l) * ((1.0 + kr * kr) * W(l) + cfg.noise_power);
    out.y(l) = A(l) * rf;
    if (qvar > 0) out.y(l) += std::sqrt(qvar) * rng.cnormal();
  }
  return out;
}

}  // namespace cfmimo
