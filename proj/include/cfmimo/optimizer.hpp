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
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "cfmimo/se_terms.hpp"

namespace cfmimo {

// Exact affine regrouping of the SINR at one instant for fixed LSFD weights:
//   Delta_k(p) = d_k p_k,   Omega_k(p) = omega0_k + sum_i W(k,i) p_i.
// Coefficients are assembled analytically from the cached term matrices.
struct AffineSinrCoeffs {
  Eigen::VectorXd d;       // desired-signal slope per UE
  Eigen::VectorXd omega0;  // power-independent denominator part
  Eigen::MatrixXd W;       // W(k,i): coefficient of p_i in Omega_k
  double p_max = 0.0;

  double delta(const Eigen::VectorXd& p, int k) const { return d(k) * p(k); }
  double omega(const Eigen::VectorXd& p, int k) const {
    return omega0(k) + W.row(k).dot(p);
  }
  double rate(const Eigen::VectorXd& p) const {
    double r = 0.0;
    for (int k = 0; k < d.size(); ++k)
      r += std::log2(1.0 + delta(p, k) / omega(p, k));
    return r;
  }
};

inline AffineSinrCoeffs extract_affine_coeffs(
    const Scenario& sc, const TermCache& tc,
    const std::vector<Eigen::VectorXcd>& weights, int n) {
  const int K = tc.K;
  AffineSinrCoeffs co;
  co.d.resize(K);
  co.omega0.resize(K);
  co.W.setZero(K, K);
  co.p_max = sc.cfg.p_max;
  const Eigen::VectorXd unit = Eigen::VectorXd::Ones(K);
  for (int k = 0; k < K; ++k) {
    const SETermSet t = compute_se_terms(sc, tc, unit, k, n);
    const Eigen::VectorXcd& a = weights[std::size_t(k)];
    const double ak = sc.hw.alpha_d[std::size_t(k)];
    co.d(k) = ak * ak * std::norm(a.dot(t.delta));
    auto quad_diag = [&](const Eigen::VectorXd& dg) {
      return (a.cwiseAbs2().array() * dg.array()).sum();
    };
    auto quad = [&](const Eigen::MatrixXcd& m) {
      return (a.adjoint() * m * a).value().real();
    };
    co.omega0(k) = quad_diag(t.adc_const) + sc.cfg.noise_power * quad_diag(t.Q);
    for (int i = 0; i < K; ++i) {
      const double ai = sc.hw.alpha_d[std::size_t(i)];
      const double kt2 = sc.cfg.kappa_t[std::size_t(i)] * sc.cfg.kappa_t[std::size_t(i)];
      double cw = (1.0 - ai + kt2) * ai;
      if (i != k) cw += ai * ai;
      double w = cw * quad(t.C[std::size_t(i)]);
      w += quad_diag(t.D[std::size_t(i)]) + quad_diag(t.Dbar[std::size_t(i)]);
      if (i == k) w += quad_diag(t.B) + quad_diag(t.Lambda);
      co.W(k, i) = w;
    }
  }
  return co;
}

// Auxiliary-variable updates.
inline Eigen::VectorXd y_update_plain(const AffineSinrCoeffs& co,
                                      const Eigen::VectorXd& p) {
  Eigen::VectorXd y(co.d.size());
  for (int k = 0; k < y.size(); ++k)
    y(k) = std::sqrt(co.delta(p, k)) / co.omega(p, k);
  return y;
}

inline Eigen::VectorXd gamma_update(const AffineSinrCoeffs& co,
                                    const Eigen::VectorXd& p) {
  Eigen::VectorXd g(co.d.size());
  for (int k = 0; k < g.size(); ++k) g(k) = co.delta(p, k) / co.omega(p, k);
  return g;
}

inline Eigen::VectorXd lambda_star(const AffineSinrCoeffs& co,
                                   const Eigen::VectorXd& p) {
  Eigen::VectorXd l(co.d.size());
  for (int k = 0; k < l.size(); ++k) {
    const double de = co.delta(p, k), om = co.omega(p, k);
    l(k) = om / ((de + om) * std::numbers::ln2);
  }
  return l;
}

inline Eigen::VectorXd y_update_dual(const AffineSinrCoeffs& co,
                                     const Eigen::VectorXd& p,
                                     const Eigen::VectorXd& gamma) {
  Eigen::VectorXd y(co.d.size());
  for (int k = 0; k < y.size(); ++k) {
    const double de = co.delta(p, k), om = co.omega(p, k);
    y(k) = std::sqrt(de * (1.0 + gamma(k))) / (de + om);
  }
  return y;
}

// Concave minorant of the rate for fixed y (quadratic-transform bound).
inline double surrogate_value(const AffineSinrCoeffs& co, const Eigen::VectorXd& p,
                              const Eigen::VectorXd& y) {
  double s = 0.0;
  for (int k = 0; k < co.d.size(); ++k) {
    const double arg = 1.0 + 2.0 * y(k) * std::sqrt(co.delta(p, k)) -
                       y(k) * y(k) * co.omega(p, k);
    if (!(arg > 0.0)) return -std::numeric_limits<double>::infinity();
    s += std::log2(arg);
  }
  return s;
}

// Dual-transform surrogate with explicit epigraph variables.
inline double surrogate_value_dual(const AffineSinrCoeffs& co,
                                   const Eigen::VectorXd& p,
                                   const Eigen::VectorXd& gamma,
                                   const Eigen::VectorXd& y) {
  double s = 0.0;
  for (int k = 0; k < co.d.size(); ++k) {
    const double de = co.delta(p, k), om = co.omega(p, k);
    const double quad =
        2.0 * y(k) * std::sqrt(de * (1.0 + gamma(k))) - y(k) * y(k) * (de + om);
    s += std::log2(1.0 + gamma(k)) - (gamma(k) - quad) / std::numbers::ln2;
  }
  return s;
}

inline Eigen::VectorXd clamp_box(const Eigen::VectorXd& p, double p_max) {
  return p.cwiseMax(0.0).cwiseMin(p_max);
}

// Projected-gradient ascent on the concave surrogate for fixed y, with Armijo
// backtracking. Initial step 1.0 (scaled to the box), shrink 0.5, slope 1e-4.
inline Eigen::VectorXd solve_p2_projected_gradient(const AffineSinrCoeffs& co,
                                                   const Eigen::VectorXd& y,
                                                   const Eigen::VectorXd& p0,
                                                   double tol = 1e-10,
                                                   int max_iters = 2000) {
  const int K = int(co.d.size());
  Eigen::VectorXd p = clamp_box(p0, co.p_max);
  double f = surrogate_value(co, p, y);
  const double tiny = 1e-30 * std::max(co.p_max, 1e-30);
  for (int it = 0; it < max_iters; ++it) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(K);
    Eigen::VectorXd arg(K);
    for (int k = 0; k < K; ++k)
      arg(k) = 1.0 + 2.0 * y(k) * std::sqrt(co.delta(p, k)) -
               y(k) * y(k) * co.omega(p, k);
    for (int j = 0; j < K; ++j) {
      double g = 0.0;
      if (co.d(j) > 0 && y(j) > 0)
        g += y(j) * std::sqrt(co.d(j) / std::max(p(j), tiny)) / arg(j);
      for (int k = 0; k < K; ++k) g -= y(k) * y(k) * co.W(k, j) / arg(k);
      grad(j) = g / std::numbers::ln2;
    }
    if (!grad.allFinite())
      throw std::runtime_error("solve_p2_projected_gradient: non-finite gradient");
    const Eigen::VectorXd probe = clamp_box(p + grad, co.p_max) - p;
    if (probe.lpNorm<Eigen::Infinity>() <= tol * std::max(1.0, co.p_max)) break;
    double step = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Eigen::VectorXd cand = clamp_box(p + step * grad, co.p_max);
      const double fc = surrogate_value(co, cand, y);
      if (fc >= f + 1e-4 * grad.dot(cand - p)) {
        p = cand;
        f = fc;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  return p;
}

// Closed-form stationary-point power update of the dual-transform surrogate.
inline Eigen::VectorXd closed_form_power_update(const AffineSinrCoeffs& co,
                                                const Eigen::VectorXd& y,
                                                const Eigen::VectorXd& gamma) {
  const int K = int(co.d.size());
  Eigen::VectorXd p(K);
  for (int k = 0; k < K; ++k) {
    double l = 0.0;  // sum_j y_j^2 dOmega_j/dp_k
    for (int j = 0; j < K; ++j) l += y(j) * y(j) * co.W(j, k);
    const double den = y(k) * y(k) * co.d(k) + l;
    if (den <= 0.0) {
      p(k) = co.p_max;  // degenerate: no one is hurt by this UE's power
      continue;
    }
    p(k) = std::min(co.p_max, y(k) * y(k) * (1.0 + gamma(k)) * co.d(k) / (den * den));
  }
  return p;
}

struct PowerAllocation {
  Eigen::VectorXd p;
  std::vector<double> objective;  // rate after each iteration (index 0 = start)
  int iterations = 0;
  bool converged = false;
};

// Iterative closed-form power optimization: update (y, gamma) at the current
// point, then the powers, until the squared step norm drops below eps.
inline PowerAllocation run_algorithm1(const AffineSinrCoeffs& co,
                                      const Eigen::VectorXd& p0, int max_iters = 200,
                                      double eps = 1e-8) {
  PowerAllocation out;
  out.p = clamp_box(p0, co.p_max);
  out.objective.push_back(co.rate(out.p));
  for (int it = 0; it < max_iters; ++it) {
    const Eigen::VectorXd gamma = gamma_update(co, out.p);
    const Eigen::VectorXd y = y_update_dual(co, out.p, gamma);
    const Eigen::VectorXd p_next = closed_form_power_update(co, y, gamma);
    const double step2 = (p_next - out.p).squaredNorm();
    out.p = p_next;
    out.objective.push_back(co.rate(out.p));
    out.iterations = it + 1;
    if (step2 <= eps) {
      out.converged = true;
      break;
    }
  }
  return out;
}

// Reference optimizer: minorize-maximize with the projected-gradient inner
// solve of the concave surrogate.
inline PowerAllocation run_mm_projected_gradient(const AffineSinrCoeffs& co,
                                                 const Eigen::VectorXd& p0,
                                                 int max_outer = 100,
                                                 double eps = 1e-10) {
  PowerAllocation out;
  out.p = clamp_box(p0, co.p_max);
  out.objective.push_back(co.rate(out.p));
  for (int it = 0; it < max_outer; ++it) {
    const Eigen::VectorXd y = y_update_plain(co, out.p);
    const Eigen::VectorXd p_next = solve_p2_projected_gradient(co, y, out.p);
    const double step2 = (p_next - out.p).squaredNorm();
    out.p = p_next;
    out.objective.push_back(co.rate(out.p));
    out.iterations = it + 1;
    if (step2 <= eps || (out.objective.back() -
                         out.objective[out.objective.size() - 2]) < 1e-12) {
      out.converged = true;
      break;
    }
  }
  return out;
}

enum class PowerAlgorithm { kClosedForm, kProjectedGradient };

struct AlternatingResult {
  Eigen::VectorXd p;
  std::vector<Eigen::VectorXcd> weights;  // per UE at the optimization instant
  std::vector<double> round_rate;         // rate at n_opt after each round
};

// Weight/power alternation at one instant: refresh the optimal second-layer
// weights at the current powers, then re-optimize the powers. rounds = 0 runs
// a single power optimization at the initial weights.
inline AlternatingResult alternate_with_lsfd(const Scenario& sc, const TermCache& tc,
                                             int n_opt, int rounds,
                                             PowerAlgorithm alg,
                                             WeightMode mode = WeightMode::kOptimal) {
  const int K = tc.K;
  AlternatingResult out;
  out.p = Eigen::VectorXd::Constant(K, 0.5 * sc.cfg.p_max);
  auto weights_at = [&](const Eigen::VectorXd& p) {
    std::vector<Eigen::VectorXcd> w;
    w.resize(std::size_t(K));
    for (int k = 0; k < K; ++k) {
      const SETermSet t = compute_se_terms(sc, tc, p, k, n_opt);
      w[std::size_t(k)] =
          (mode == WeightMode::kOptimal) ? optimal_lsfd(sc, t, p) : sld_weights(tc.M);
    }
    return w;
  };
  auto optimize = [&](const std::vector<Eigen::VectorXcd>& w,
                      const Eigen::VectorXd& p_start) {
    const AffineSinrCoeffs co = extract_affine_coeffs(sc, tc, w, n_opt);
    return (alg == PowerAlgorithm::kClosedForm)
               ? run_algorithm1(co, p_start)
               : run_mm_projected_gradient(co, p_start);
  };
  out.weights = weights_at(out.p);
  for (int r = 0; ; ++r) {
    const PowerAllocation pa = optimize(out.weights, out.p);
    out.p = pa.p;
    out.round_rate.push_back(pa.objective.back());
    if (r >= rounds) break;
    out.weights = weights_at(out.p);
  }
  return out;
}

}  // namespace cfmimo
