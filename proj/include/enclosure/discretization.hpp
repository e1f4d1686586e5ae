#pragma once

// Trapezoidal-rule path from sampled boundary temperatures to the discrete
// indicator and endpoint estimate:
//
//   Q_{N_t} ~ int_0^T e^{-tau^2 t} u(0,t) dt   (composite trapezoid, h = T/N_t)
//   I_{N_t}(tau) = tau Q_{N_t} + f_hat(tau)
//   a_{N_t}(tau) = -log| I_{N_t} / (-2 f_hat) | / (2 tau)
//
// plus the standard quadrature error bound and the certified gap between
// a_{N_t}(tau) and the continuous a(tau).

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>

#include "enclosure/indicator.hpp"
#include "enclosure/series_solution.hpp"
#include "enclosure/types.hpp"

namespace enclosure {

/// Equidistant subdivision of [0, T] into N_t steps.
struct QuadratureGrid {
  int n_t;
  double T;
  QuadratureGrid(int subdivisions, double final_time)
      : n_t(subdivisions), T(final_time) {
    if (n_t < 1) throw std::invalid_argument("QuadratureGrid: need N_t >= 1");
    if (!(T > 0.0)) throw std::invalid_argument("QuadratureGrid: need T > 0");
  }
};

/// Composite trapezoid with step h = T/L over L+1 equidistant values:
/// (T/L) [ g_0/2 + g_1 + ... + g_{L-1} + g_L/2 ]. Compensated summation keeps
/// the accumulation at a few ulp even for 10^6 samples.
inline double trapezoid(std::span<const double> values, double T) {
  if (values.size() < 2)
    throw std::invalid_argument("trapezoid: need at least 2 samples");
  const std::size_t L = values.size() - 1;
  KahanSum acc;
  acc.add(0.5 * values.front());
  for (std::size_t j = 1; j < L; ++j) acc.add(values[j]);
  acc.add(0.5 * values.back());
  return T / static_cast<double>(L) * acc.value();
}

inline double trapezoid(std::span<const double> values, const QuadratureGrid& grid) {
  if (values.size() != static_cast<std::size_t>(grid.n_t) + 1)
    throw std::invalid_argument("trapezoid: sample count does not match grid");
  return trapezoid(values, grid.T);
}

/// Trapezoid error bound T^3 sup|g''| / (12 L^2) for twice continuously
/// differentiable integrands.
inline double trapezoid_error_bound(double T, int L, double sup_g2) {
  if (L < 1) throw std::invalid_argument("trapezoid_error_bound: need L >= 1");
  const double l = static_cast<double>(L);
  return T * T * T * sup_g2 / (12.0 * l * l);
}

/// Discrete indicator from measured samples: the trapezoid of
/// e^{-tau^2 t} u(0,t) (exponential weight applied at every node, endpoints
/// included), then I_{N_t} and the endpoint estimate.
struct DiscreteIndicator {
  double q;      ///< Q_{N_t}(u_hat)
  double i_nt;   ///< tau Q + f_hat
  std::optional<double> a_nt;
};

inline DiscreteIndicator discrete_indicator(const TraceSamples& samples,
                                            double f_hat, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("discrete_indicator: need tau > 0");
  if (samples.grid_skew() > 1e-9)
    throw std::invalid_argument("discrete_indicator: samples must be equidistant");
  const std::size_t L = samples.subdivisions();
  const double s = tau * tau;
  KahanSum acc;
  for (std::size_t j = 0; j <= L; ++j) {
    const double arg = s * samples.t[j];
    const double w = (arg > kExpCutoff) ? 0.0 : std::exp(-arg);
    const double endpoint_factor = (j == 0 || j == L) ? 0.5 : 1.0;
    acc.add(endpoint_factor * w * samples.u[j]);
  }
  const double q = samples.geometry.T / static_cast<double>(L) * acc.value();
  const double i_nt = indicator_value(q, f_hat, tau);
  return {q, i_nt, recover_endpoint(i_nt, f_hat, tau)};
}

/// Flux transform evaluated by the same composite trapezoid the data integral
/// uses, with the flux sampled on the identical grid. The region-scan
/// protocol treats the known flux exactly like the measured temperatures;
/// the difference from the exact transform is the same O(N_t^-2) quadrature
/// error the data side carries.
inline double laplace_transform_sampled(const SourceTerm& source, double tau,
                                        double T, std::int64_t n_t) {
  if (!(tau > 0.0))
    throw std::invalid_argument("laplace_transform_sampled: need tau > 0");
  if (n_t < 1)
    throw std::invalid_argument("laplace_transform_sampled: need N_t >= 1");
  const double s = tau * tau;
  KahanSum acc;
  for (std::int64_t j = 0; j <= n_t; ++j) {
    const double tj = static_cast<double>(j) * T / static_cast<double>(n_t);
    const double arg = s * tj;
    const double w = (arg > kExpCutoff) ? 0.0 : std::exp(-arg);
    const double endpoint_factor = (j == 0 || j == n_t) ? 0.5 : 1.0;
    acc.add(endpoint_factor * w * source_value(source, tj));
  }
  return T / static_cast<double>(n_t) * acc.value();
}

/// Certified gap |a_{N_t}(tau) - a(tau)| once N_t clears the sampling
/// threshold:
///   T^3 cmax_norm / (48 c_mu (1-eta)(1-eps)) * (1/tau) (tau^-d + tau^-(2+d))^2.
inline double discrete_gap_bound(const CertificationParams& p, const Geometry& g,
                                 double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("discrete_gap_bound: need tau > 0");
  p.validate();
  const double decay = std::pow(tau, -p.delta) + std::pow(tau, -(2.0 + p.delta));
  return g.T * g.T * g.T * p.c_max /
         (48.0 * p.c_mu * (1.0 - p.eta) * (1.0 - p.epsilon)) * decay * decay / tau;
}

}  // namespace enclosure
