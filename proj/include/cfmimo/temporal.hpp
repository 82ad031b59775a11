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
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "cfmimo/rng.hpp"

namespace cfmimo {

// Speed of light as used in Doppler budgets (engineering convention).
constexpr double kSpeedOfLight = 3.0e8;

// Zeroth-order Bessel function of the first kind. Power series below |x|=12,
// Hankel asymptotic expansion above; absolute error <= 1e-10 over the real
// line (the series loses ~5 digits to cancellation near the switch point,
// still comfortably inside budget).
inline double bessel_j0(double x) {
  x = std::abs(x);
  if (x < 12.0) {
    const double q = 0.25 * x * x;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k <= 64; ++k) {
      term *= -q / (double(k) * double(k));
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum) + 1e-300) break;
    }
    return sum;
  }
  // J0(x) ~ sqrt(2/(pi x)) [P(x) cos(x-pi/4) - Q(x) sin(x-pi/4)] with the
  // standard Hankel coefficients t_m = t_{m-1} (2m-1)^2 / (8 m x).
  const double chi = x - 0.25 * M_PI;
  double t = 1.0, P = 1.0, Q = 0.0;
  double prev = 1.0;
  for (int m = 1; m <= 20; ++m) {
    t *= double(2 * m - 1) * double(2 * m - 1) / (8.0 * m * x);
    if (t > prev) break;  // asymptotic series started diverging
    prev = t;
    const int phase = (m / 2) % 2;  // sign pattern: + + - - + + ...
    const double signed_t = phase ? -t : t;
    if (m % 2 == 0)
      P += signed_t;
    else
      Q += signed_t;
    if (t < 1e-17) break;
  }
  return std::sqrt(2.0 / (M_PI * x)) * (P * std::cos(chi) + Q * std::sin(chi));
}

// Jakes temporal correlation between channel samples `delta` instants apart.
inline double jakes_rho(double velocity, double carrier_freq, double sample_time,
                        int delta) {
  if (delta < 0) throw std::invalid_argument("jakes_rho: delta must be >= 0");
  const double doppler = velocity * carrier_freq / kSpeedOfLight;
  return bessel_j0(2.0 * M_PI * doppler * sample_time * double(delta));
}

// Per-UE temporal correlation table over one resource block.
struct AgingProfile {
  std::vector<double> rho;      // rho[delta], delta = 0..tau_c-1
  std::vector<double> rho_bar;  // sqrt(1 - rho^2)

  double at(int delta) const { return rho.at(std::size_t(delta)); }
  double bar(int delta) const { return rho_bar.at(std::size_t(delta)); }
};

inline AgingProfile build_aging_profile(double velocity, double carrier_freq,
                                        double sample_time, int tau_c) {
  AgingProfile p;
  p.rho.resize(std::size_t(tau_c));
  p.rho_bar.resize(std::size_t(tau_c));
  for (int d = 0; d < tau_c; ++d) {
    const double r = jakes_rho(velocity, carrier_freq, sample_time, d);
    p.rho[std::size_t(d)] = r;
    p.rho_bar[std::size_t(d)] = std::sqrt(std::max(0.0, 1.0 - r * r));
  }
  return p;
}

// h = los * e^{j phi} + sqrt_R * g with phi ~ U[-pi,pi), g ~ CN(0, I).
inline Eigen::VectorXcd sample_rician(const Eigen::VectorXcd& los,
                                      const Eigen::MatrixXcd& sqrt_R,
                                      RngStream& rng) {
  const Eigen::Index n = los.size();
  Eigen::VectorXcd g(n);
  for (Eigen::Index i = 0; i < n; ++i) g(i) = rng.cnormal();
  const std::complex<double> ph = std::polar(1.0, rng.phase());
  return los * ph + sqrt_R * g;
}

// Aged sample anchored at h_anchor: h[n] = rho h[anchor] + rho_bar (los e^{j phi} + f),
// with a fresh phase and innovation per call.
inline Eigen::VectorXcd sample_aged(const Eigen::VectorXcd& h_anchor,
                                    double rho, const Eigen::VectorXcd& los,
                                    const Eigen::MatrixXcd& sqrt_R,
                                    RngStream& rng) {
  if (std::abs(rho) > 1.0 + 1e-12)
    throw std::invalid_argument("sample_aged: |rho| must be <= 1");
  const double rho_bar = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  return rho * h_anchor + rho_bar * sample_rician(los, sqrt_R, rng);
}

}  // namespace cfmimo
