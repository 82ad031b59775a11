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

#include <Eigen/Dense>

namespace cfmimo {

// Fourth-order moments of phase-randomized Rician vectors
//   h = a e^{j phi} + R^{1/2} g,   phi ~ U[-pi,pi),  g ~ CN(0, I),
// for arbitrary complex sandwich matrices M1, M2. Aged samples relate to the
// anchor through h[t] = rho h + sqrt(1-rho^2) u with u an independent copy of
// the same law, so every lagged moment below is exactly affine in rho^2.

using Cplx = std::complex<double>;

// E{ h^H M1 h h^H M2 h }
inline Cplx quartic_full(const Eigen::VectorXcd& a, const Eigen::MatrixXcd& R,
                         const Eigen::MatrixXcd& M1, const Eigen::MatrixXcd& M2) {
  const Cplx am1a = a.adjoint() * M1 * a;
  const Cplx am2a = a.adjoint() * M2 * a;
  const Cplx t1 = (M1 * R).trace();
  const Cplx t2 = (M2 * R).trace();
  const Cplx cross = (M1 * R * M2 * R).trace();
  const Cplx u12 = a.adjoint() * M1 * R * M2 * a;
  const Cplx u21 = a.adjoint() * M2 * R * M1 * a;
  return (am1a + t1) * (am2a + t2) + cross + u12 + u21;
}

// E{ h^H M1 diag(h h^H) M2 h }
inline Cplx quartic_diag(const Eigen::VectorXcd& a, const Eigen::MatrixXcd& R,
                         const Eigen::MatrixXcd& M1, const Eigen::MatrixXcd& M2) {
  const Eigen::MatrixXcd RM1 = R * M1;
  const Eigen::MatrixXcd M2R = M2 * R;
  const Eigen::ArrayXcd da = a.cwiseAbs2().cast<Cplx>().array();
  const Eigen::ArrayXcd dR = R.diagonal().array();
  const Eigen::ArrayXcd dRM1 = RM1.diagonal().array();
  const Eigen::ArrayXcd dM2R = M2R.diagonal().array();
  const Eigen::ArrayXcd left = (a.adjoint() * M1).transpose().array();  // (h^H M1)_l
  const Eigen::ArrayXcd right = (M2 * a).array();                       // (M2 h)_l
  const Eigen::ArrayXcd dM2RM1 = (M2R * M1).diagonal().array();
  const Eigen::ArrayXcd dM2RM1b = (M2 * RM1).diagonal().array();
  Cplx out = (left * da * right).sum();
  out += (left * dR * right).sum();
  out += (da * dM2RM1).sum();
  out += (dR * dM2RM1b).sum();
  out += (dRM1 * dM2R).sum();
  out += (left * dM2R * a.array()).sum();
  out += (a.conjugate().array() * dRM1 * right).sum();
  return out;
}

// E{ h1^H M1 (h2 h2^H) M2 h1 } with corr(h1, h) = rho1, corr(h2, h) = rho2
// through a common anchor. rho = rho1 for the "pilot vs anchor" case.
inline Cplx lagged_full(const Eigen::VectorXcd& a, const Eigen::MatrixXcd& R,
                        const Eigen::MatrixXcd& M1, const Eigen::MatrixXcd& M2,
                        double rho) {
  const Eigen::MatrixXcd Rbar = a * a.adjoint() + R;
  const Cplx indep = (M1 * Rbar * M2 * Rbar).trace();
  const double r2 = rho * rho;
  return r2 * quartic_full(a, R, M1, M2) + (1.0 - r2) * indep;
}

// E{ h1^H M1 diag(h2 h2^H) M2 h1 }, effective correlation rho_eff = rho1*rho2.
inline Cplx lagged_diag(const Eigen::VectorXcd& a, const Eigen::MatrixXcd& R,
                        const Eigen::MatrixXcd& M1, const Eigen::MatrixXcd& M2,
                        double rho_eff) {
  const Eigen::MatrixXcd Rbar = a * a.adjoint() + R;
  const Cplx indep =
      (M1 * Rbar.diagonal().asDiagonal() * M2 * Rbar).trace();
  const double r2 = rho_eff * rho_eff;
  return r2 * quartic_diag(a, R, M1, M2) + (1.0 - r2) * indep;
}

// E{ |h1_l|^2 |h2_l'|^2 } as an N x N matrix for two lagged samples with
// effective correlation rho_eff.
inline Eigen::MatrixXd diag_power_cross(const Eigen::VectorXcd& a,
                                        const Eigen::MatrixXcd& R,
                                        double rho_eff) {
  const Eigen::VectorXd dbar = (a.cwiseAbs2() + R.diagonal().real());
  Eigen::MatrixXd out = dbar * dbar.transpose();
  const double r2 = rho_eff * rho_eff;
  if (r2 > 0.0) {
    const Eigen::MatrixXd absR2 = R.cwiseAbs2();
    const Eigen::MatrixXd coh =
        2.0 * ((a.conjugate() * a.transpose()).cwiseProduct(R)).real();
    out += r2 * (absR2 + coh);
  }
  return out;
}

// E{ tr(Dw diag(h1 h1^H) M1 diag(h2 h2^H) M2) } for diagonal Dw; the generic
// double-diagonal moment behind the receive-distortion terms.
inline Cplx double_diag_moment(const Eigen::VectorXcd& a, const Eigen::MatrixXcd& R,
                               const Eigen::VectorXd& Dw, const Eigen::MatrixXcd& M1,
                               const Eigen::MatrixXcd& M2, double rho_eff) {
  const Eigen::MatrixXd edd = diag_power_cross(a, R, rho_eff);
  // sum_{l,l'} Dw_l M1_{l l'} M2_{l' l} E{|h1_l|^2 |h2_l'|^2}
  Cplx out = 0.0;
  const Eigen::Index n = Dw.size();
  for (Eigen::Index l = 0; l < n; ++l)
    for (Eigen::Index lp = 0; lp < n; ++lp)
      out += Dw(l) * M1(l, lp) * M2(lp, l) * edd(l, lp);
  return out;
}

}  // namespace cfmimo
