#pragma once

// Continuous-time indicator machinery. The probe v(x,t) = e^{-tau^2 t} e^{-x tau}
// solves the backward heat equation; pairing it with the boundary data gives
//
//   I(tau) = tau * u_hat(0,tau) + f_hat(tau),
//   w_hat(tau) = int_0^T e^{-tau^2 t} w(t) dt,
//
// and the endpoint estimate
//
//   a(tau) = -log| I(tau) / (-2 f_hat(tau)) | / (2 tau)  ->  a  as tau -> inf.
//
// For the exact (steady transform) problem the ODE solves in closed form and
//
//   I_inf(tau) = -2 f_hat(tau) e^{-2 a tau} / (1 - e^{-2 a tau}),
//   a - a_inf(tau) = -log(1 - e^{-2 a tau}) / (2 tau),
//
// which this header exposes as oracles for everything downstream.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <variant>

#include "enclosure/quadrature.hpp"
#include "enclosure/series_solution.hpp"
#include "enclosure/types.hpp"

namespace enclosure {

// ============================================================================
// Finite-horizon transforms
// ============================================================================

/// int_0^T t^r e^{-s t} dt via the integration-by-parts recursion
/// M_0 = (1 - e^{-sT})/s,  M_r = (r M_{r-1} - T^r e^{-sT}) / s.
inline double exp_monomial_integral(int r, double s, double T) {
  if (r < 0) throw std::invalid_argument("exp_monomial_integral: need r >= 0");
  if (!(s > 0.0)) throw std::invalid_argument("exp_monomial_integral: need s > 0");
  const double tail = (s * T > kExpCutoff) ? 0.0 : std::exp(-s * T);
  double m = -std::expm1(-s * T) / s;
  double tpow = 1.0;
  for (int j = 1; j <= r; ++j) {
    tpow *= T;
    m = (static_cast<double>(j) * m - tpow * tail) / s;
  }
  return m;
}

/// Flux transform f_hat(tau) = int_0^T e^{-tau^2 t} f(t) dt. Monomial and
/// exponential-monomial fluxes use the exact recursion (shifted to
/// s = tau^2 + nu for the latter); generic fluxes use adaptive quadrature to
/// 1e-14 relative.
inline double laplace_transform(const SourceTerm& source, double tau, double T) {
  if (!(tau > 0.0)) throw std::invalid_argument("laplace_transform: need tau > 0");
  if (!(T > 0.0)) throw std::invalid_argument("laplace_transform: need T > 0");
  if (const auto* m = std::get_if<Monomial>(&source))
    return exp_monomial_integral(m->r, tau * tau, T);
  if (const auto* e = std::get_if<ExpMonomial>(&source))
    return e->c * exp_monomial_integral(2, tau * tau + e->nu, T);
  const auto& f = std::get<Generic>(source).f;
  const auto integrand = [&](double t) { return std::exp(-tau * tau * t) * f(t); };
  const double coarse = integrate_adaptive(integrand, 0.0, T, 1e-8).value;
  const double goal = 1e-14 * std::max(std::abs(coarse), 1e-280);
  return integrate_adaptive(integrand, 0.0, T, goal).value;
}

/// Decay data for monomial fluxes: f_hat(tau) obeys
/// c_mu tau^-mu <= f_hat(tau) <= r! tau^-mu for tau > 1/sqrt(T), with
/// mu = 2(r+1) and c_mu = r! (1 - (sum_{k<=r} 1/k!) / e).
struct TransformConstants {
  double mu;
  double c_mu;
};

inline TransformConstants monomial_transform_constants(int r) {
  if (r < 0)
    throw std::invalid_argument("monomial_transform_constants: need r >= 0");
  double partial = 0.0, kfact = 1.0;
  for (int k = 0; k <= r; ++k) {
    if (k > 0) kfact *= static_cast<double>(k);
    partial += 1.0 / kfact;
  }
  const double rfact = detail::factorial(r);
  return {2.0 * (r + 1.0), rfact * (1.0 - partial / std::exp(1.0))};
}

// ============================================================================
// Exact transform of the truncated trace
// ============================================================================

/// u_hat_N(tau) = int_0^T e^{-tau^2 t} u_N(t) dt, integrated term by term
/// exactly (no quadrature). Supports monomial and exponential-monomial
/// fluxes; the departure from the transform of the full trace is at most
/// T times the series truncation bound.
inline double trace_transform_exact(const Geometry& g, const SourceTerm& source,
                                    double tau, SeriesTruncation trunc) {
  if (!(tau > 0.0)) throw std::invalid_argument("trace_transform_exact: need tau > 0");
  const double s = tau * tau;
  const double T = g.T;
  const double a = g.a;
  if (const auto* m = std::get_if<Monomial>(&source)) {
    const int r = m->r;
    double v = -exp_monomial_integral(r + 1, s, T) / ((r + 1.0) * a) -
               (a / 3.0) * exp_monomial_integral(r, s, T);
    for (int j = 0; j < r; ++j) {
      const int ord = 2 * r + 2 - 2 * j;
      v -= (2.0 / a) * b_coeff(j, r) * std::pow(a / pi, ord) * zeta_even(ord) *
           exp_monomial_integral(j, s, T);
    }
    const double coef = 2.0 * ((r % 2 == 0) ? 1.0 : -1.0) * detail::factorial(r) / a;
    double series = 0.0;
    for (int k = trunc.modes; k >= 1; --k) {
      const double lam = eigenvalue(g, k);
      const double st = s + lam;
      series += std::pow(lam, -(r + 1)) * (-std::expm1(-st * T)) / st;
    }
    return v + coef * series;
  }
  if (const auto* e = std::get_if<ExpMonomial>(&source)) {
    const double nu = e->nu;
    if (!(nu > 0.0))
      throw std::invalid_argument("trace_transform_exact: need nu > 0");
    ExpMonomialTrace::check_not_singular(g, nu);
    const double sp = s + nu;  // envelope terms transform at shifted rate
    double sa = 0.0, sb = 0.0, sc = 0.0, series = 0.0;
    for (int k = trunc.modes; k >= 1; --k) {
      const double lam = eigenvalue(g, k);
      const double beta = lam - nu;
      sa += -nu / (lam * beta);
      sb += 1.0 / (beta * beta);
      sc += -1.0 / (beta * beta * beta);
      const double st = s + lam;
      series += (4.0 / (a * beta * beta * beta)) * (-std::expm1(-st * T)) / st;
    }
    const double q2 = -a / 3.0 + 1.0 / (a * nu) + (2.0 / a) * sa;
    const double q1 = 2.0 / (a * nu * nu) + (4.0 / a) * sb;
    const double q0 = 2.0 / (a * nu * nu * nu) + (4.0 / a) * sc;
    const double q_const = -2.0 / (a * nu * nu * nu);
    return e->c * (q2 * exp_monomial_integral(2, sp, T) +
                   q1 * exp_monomial_integral(1, sp, T) +
                   q0 * exp_monomial_integral(0, sp, T) +
                   q_const * exp_monomial_integral(0, s, T) + series);
  }
  throw std::invalid_argument(
      "trace_transform_exact: closed forms exist for Monomial/ExpMonomial only");
}

// ============================================================================
// Indicator and endpoint recovery
// ============================================================================

/// I(tau) = tau * u_hat + f_hat.
inline double indicator_value(double u_hat, double f_hat, double tau) {
  return tau * u_hat + f_hat;
}

/// Endpoint estimate a(tau) = -log(I / (-2 f_hat)) / (2 tau). Returns
/// nullopt when the ratio is nonpositive (or has underflowed to zero), in
/// which case the frequency lies outside any trusted region. f_hat must be
/// nonzero.
inline std::optional<double> recover_endpoint(double indicator, double f_hat,
                                              double tau) {
  if (f_hat == 0.0)
    throw std::domain_error("recover_endpoint: f_hat must be nonzero");
  if (!(tau > 0.0)) throw std::invalid_argument("recover_endpoint: need tau > 0");
  const double ratio = indicator / (-2.0 * f_hat);
  if (!(ratio > 0.0)) return std::nullopt;
  return -std::log(ratio) / (2.0 * tau);
}

/// Exact-problem indicator I_inf(tau) = -2 f_hat e^{-2 a tau} / (1 - e^{-2 a tau}).
inline double indicator_asymptotic(const Geometry& g, double f_hat, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("indicator_asymptotic: need tau > 0");
  const double x = 2.0 * g.a * tau;
  const double num = (x > kExpCutoff) ? 0.0 : std::exp(-x);
  return -2.0 * f_hat * num / (-std::expm1(-x));
}

/// Exact recovery gap a - a_inf(tau) = -log(1 - e^{-2 a tau}) / (2 tau),
/// positive and strictly decreasing in tau. Evaluated log1p-style so large
/// tau keeps full relative accuracy.
inline double asymptotic_gap(const Geometry& g, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("asymptotic_gap: need tau > 0");
  const double x = 2.0 * g.a * tau;
  if (x > kExpCutoff) return 0.0;  // gap below every representable double
  return -std::log1p(-std::exp(-x)) / (2.0 * tau);
}

/// Relative-error budget |E(tau)| for I against I_inf:
/// e^{-T tau^2 + 3 a_U tau} tau^mu * cT_norm / (2 c_mu), accumulated in log
/// space so large tau underflows gracefully instead of overflowing midway.
inline double indicator_model_error_bound(const Geometry& g, double tau,
                                          double mu, double c_mu,
                                          double cT_norm) {
  const double log_e = -g.T * tau * tau + 3.0 * g.a_U * tau + mu * std::log(tau) +
                       std::log(cT_norm) - std::log(2.0 * c_mu);
  return std::exp(log_e);
}

// ============================================================================
// Per-frequency bundle
// ============================================================================

/// One frequency's worth of indicator data. `a_est` is empty when the log
/// argument was nonpositive.
struct IndicatorSample {
  double tau;
  double f_hat;
  double u_hat;
  double indicator;
  std::optional<double> a_est;
};

inline IndicatorSample make_indicator_sample(const Geometry& g,
                                             const SourceTerm& source,
                                             double tau, SeriesTruncation trunc) {
  const double f_hat = laplace_transform(source, tau, g.T);
  const double u_hat = trace_transform_exact(g, source, tau, trunc);
  const double ind = indicator_value(u_hat, f_hat, tau);
  return {tau, f_hat, u_hat, ind, recover_endpoint(ind, f_hat, tau)};
}

/// Significant decimal digits expected to survive the cancellation in
/// tau*u_hat + f_hat, roughly 16 - 2 a tau / ln 10. Below ~2 the recovered
/// endpoint is numerically meaningless in double precision.
inline double cancellation_digits(double a, double tau) {
  return 16.0 - 2.0 * a * tau / std::log(10.0);
}

}  // namespace enclosure
