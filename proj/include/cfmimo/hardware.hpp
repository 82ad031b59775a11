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
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "cfmimo/config.hpp"
#include "cfmimo/rng.hpp"

namespace cfmimo {

namespace detail {

inline double gauss_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}
inline double gauss_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double quantizer_mse(const std::vector<double>& centroids) {
  const std::size_t L = centroids.size();
  std::vector<double> edges(L + 1);
  edges[0] = -40.0;
  edges[L] = 40.0;
  for (std::size_t i = 1; i < L; ++i) edges[i] = 0.5 * (centroids[i - 1] + centroids[i]);
  double mse = 0.0;
  for (std::size_t i = 0; i < L; ++i) {
    const double lo = edges[i], hi = edges[i + 1], c = centroids[i];
    const double prob = gauss_cdf(hi) - gauss_cdf(lo);
    const double second = prob - (hi * gauss_pdf(hi) - lo * gauss_pdf(lo));
    const double first = gauss_pdf(lo) - gauss_pdf(hi);
    mse += second - 2.0 * c * first + c * c * prob;
  }
  return mse;
}

}  // namespace detail

// Normalized MSE of the optimal (Lloyd-Max) scalar quantizer of a unit-variance
// Gaussian with 2^bits levels. Fixed-point iteration: thresholds at centroid
// midpoints, centroids at conditional means.
inline double lloyd_max_distortion(int bits, int max_iters = 200000,
                                   double tol = 1e-14) {
  if (bits < 1) throw std::domain_error("lloyd_max_distortion: bits must be >= 1");
  const std::size_t L = std::size_t(1) << bits;
  std::vector<double> c(L);
  for (std::size_t i = 0; i < L; ++i) {
    // quantile initialization
    const double q = (double(i) + 0.5) / double(L);
    double lo = -10.0, hi = 10.0;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (detail::gauss_cdf(mid) < q ? lo : hi) = mid;
    }
    c[i] = 0.5 * (lo + hi);
  }
  double last = detail::quantizer_mse(c);
  for (int it = 0; it < max_iters; ++it) {
    std::vector<double> edges(L + 1);
    edges[0] = -40.0;
    edges[L] = 40.0;
    for (std::size_t i = 1; i < L; ++i) edges[i] = 0.5 * (c[i - 1] + c[i]);
    for (std::size_t i = 0; i < L; ++i) {
      const double p = detail::gauss_cdf(edges[i + 1]) - detail::gauss_cdf(edges[i]);
      const double m = detail::gauss_pdf(edges[i]) - detail::gauss_pdf(edges[i + 1]);
      if (p > 1e-300) c[i] = m / p;
    }
    const double cur = detail::quantizer_mse(c);
    if (std::abs(last - cur) < tol * std::max(cur, 1e-12)) return cur;
    last = cur;
  }
  return last;
}

// Distortion factors for b = 1..8 produced by lloyd_max_distortion above
// (regenerate with `cfmimo-cli adc-table`). b = 1 equals 1 - 2/pi.
inline constexpr double kAdcDistortionTable[] = {
    3.633802276324e-01, 1.174818478293e-01, 3.454776078851e-02,
    9.501008008197e-03, 2.504668355702e-03, 6.442396653606e-04,
    1.634782302705e-04, 4.118508403241e-05,
};
inline constexpr int kAdcTableMaxBits = 8;

// Distortion factor iota in [0,1); ideal converters (kIdealBits) map to 0.
inline double adc_distortion_factor(int bits) {
  if (bits == kIdealBits) return 0.0;
  if (bits < 1) throw std::domain_error("adc_distortion_factor: bits must be >= 1");
  if (bits <= kAdcTableMaxBits) return kAdcDistortionTable[bits - 1];
  // rarely used resolutions: compute once, memoize
  static std::map<int, double> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(bits);
  if (it == cache.end()) it = cache.emplace(bits, lloyd_max_distortion(bits)).first;
  return it->second;
}

// Bussgang gain matrix diag(1 - iota_i) for one AP.
inline Eigen::VectorXd build_adc_matrix(const std::vector<int>& bits_per_antenna) {
  Eigen::VectorXd a(bits_per_antenna.size());
  for (std::size_t i = 0; i < bits_per_antenna.size(); ++i)
    a(Eigen::Index(i)) = 1.0 - adc_distortion_factor(bits_per_antenna[i]);
  return a;
}

// Per-scenario hardware state: DAC gains at the UEs, EVMs, and per-AP ADC
// gain diagonals A_m with B_m = A_m (I - A_m).
struct HardwareProfile {
  std::vector<double> alpha_d;      // per UE, 1 - iota_dac
  std::vector<double> kappa_t;      // per UE
  std::vector<double> kappa_r;      // per AP
  std::vector<Eigen::VectorXd> A;   // per AP, length-N diagonal of A_m
  std::vector<Eigen::VectorXd> B;   // per AP, diagonal of A_m (I - A_m)

  bool ideal() const {
    for (double a : alpha_d)
      if (a != 1.0) return false;
    for (double k : kappa_t)
      if (k != 0.0) return false;
    for (double k : kappa_r)
      if (k != 0.0) return false;
    for (const auto& a : A)
      if ((a.array() != 1.0).any()) return false;
    return true;
  }
};

inline HardwareProfile build_hardware(const SystemConfig& cfg) {
  HardwareProfile hw;
  hw.kappa_t = cfg.kappa_t;
  hw.kappa_r = cfg.kappa_r;
  hw.alpha_d.resize(cfg.num_ues);
  for (int k = 0; k < cfg.num_ues; ++k)
    hw.alpha_d[std::size_t(k)] = 1.0 - adc_distortion_factor(cfg.dac_bits[std::size_t(k)]);
  hw.A.resize(cfg.num_aps);
  hw.B.resize(cfg.num_aps);
  for (int m = 0; m < cfg.num_aps; ++m) {
    std::vector<int> bits(cfg.adc_bits.begin() + std::ptrdiff_t(m) * cfg.num_antennas,
                          cfg.adc_bits.begin() + std::ptrdiff_t(m + 1) * cfg.num_antennas);
    hw.A[std::size_t(m)] = build_adc_matrix(bits);
    hw.B[std::size_t(m)] =
        hw.A[std::size_t(m)].array() * (1.0 - hw.A[std::size_t(m)].array());
  }
  return hw;
}

// UE transmit chain: DAC output alpha sqrt(p) s + DAC noise, then RF distortion.
inline std::complex<double> distort_ue_transmit(std::complex<double> symbol,
                                                double power, double alpha_d,
                                                double kappa_t, RngStream& rng) {
  if (power < 0) throw std::domain_error("distort_ue_transmit: negative power");
  const double dac_var = alpha_d * (1.0 - alpha_d) * power;
  const double rf_var = kappa_t * kappa_t * alpha_d * power;
  std::complex<double> out = alpha_d * std::sqrt(power) * symbol;
  if (dac_var > 0) out += std::sqrt(dac_var) * rng.cnormal();
  if (rf_var > 0) out += std::sqrt(rf_var) * rng.cnormal();
  return out;
}

// AP receive chain. W is the conditional per-antenna power diag(E{y y^H | h});
// the caller supplies it because it depends on the realized channels, not on
// the instantaneous received sample.
inline Eigen::VectorXcd distort_ap_receive(const Eigen::VectorXcd& y,
                                           double kappa_r,
                                           const Eigen::VectorXd& A,
                                           const Eigen::VectorXd& W,
                                           double sigma2, RngStream& rng) {
  if ((W.array() < -1e-15).any())
    throw std::domain_error("distort_ap_receive: W must be a PSD diagonal");
  const Eigen::Index n = y.size();
  Eigen::VectorXcd y_rf = y;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = std::max(0.0, W(i));
    if (kappa_r > 0) y_rf(i) += std::sqrt(kappa_r * kappa_r * w) * rng.cnormal();
    if (sigma2 > 0) y_rf(i) += std::sqrt(sigma2) * rng.cnormal();
  }
  Eigen::VectorXcd y_adc(n);
  const Eigen::VectorXd Bdiag = A.array() * (1.0 - A.array());
  for (Eigen::Index i = 0; i < n; ++i) {
    y_adc(i) = A(i) * y_rf(i);
    const double qvar =
        Bdiag(i) * ((1.0 + kappa_r * kappa_r) * std::max(0.0, W(i)) + sigma2);
    if (qvar > 0) y_adc(i) += std::sqrt(qvar) * rng.cnormal();
  }
  return y_adc;
}

}  // namespace cfmimo
