#pragma once

// Trusted-frequency-region engine. Three admissibility functions gate the
// base frequency tau0,
//
//   F(T)   = 3 a_U/(4T) (1 + sqrt(1 + 8 T mu / (9 a_U^2)))   (need F <= tau0)
//   G(tau) = e^{-T tau^2 + 3 a_U tau} tau^mu cT_norm / (2 c_mu)  (need <= eps)
//   H(tau) = T^3 cmax_norm / (24 c_mu (1-eps)) (tau^-d + tau^-(2+d))^2 (<= eta)
//
// the sampling theorem prescribes N_t >= floor(e^{a_U tau} tau^{(5+mu+2d)/2}) + 1,
// and on [tau0, tau_max(N_t)] the recovered endpoint carries the certified
// bound  -log(1 - e^{-2 a_L tau})/(2 tau) + eps/(2 tau (1-eps)) + eta/(2 tau (1-eta)).
// G and the sampling threshold are accumulated in log space: e^{-T tau^2}
// alone underflows double precision near tau = 12 at T = 5 while the sweeps
// go to 15.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "enclosure/discretization.hpp"
#include "enclosure/indicator.hpp"
#include "enclosure/series_solution.hpp"
#include "enclosure/types.hpp"

namespace enclosure {

// ============================================================================
// Norm-scaled regularity constants
// ============================================================================

/// Bound on ||u(.,T)||_{L^1[0,a]}. Monomial fluxes get the sharp
/// (1/3 + 2/(3pi)) T^r a_U^2 + T^{r+1}/(r+1); everything else
/// [(1/3 + 2/(3pi)) a_U^2 + T] * ||f||_inf.
inline double c_T_bound(const Geometry& g, const SourceTerm& source);

/// Bound on ||u(0,.)||_{W^{2,inf}[0,T]}. Requires f(0) = f'(0) = 0 with f in
/// W^{2,inf}: monomials need r >= 2, exponential monomials qualify always,
/// generic sources need both derivative callables. Monomial value for
/// T >= r+1 is T^{r+1}/a_L + T^r a_U / 3.
inline double c_max_bound(const Geometry& g, const SourceTerm& source);

namespace detail {

inline double sup_abs_on_grid(const std::function<double(double)>& f, double T,
                              int cells = 8192) {
  double best = 0.0;
  for (int i = 0; i <= cells; ++i)
    best = std::max(best, std::abs(f(T * static_cast<double>(i) / cells)));
  return best;
}

/// sup over [0,T] of |c| t^2 e^{-nu t} and its first two derivatives,
/// evaluated at the closed-form critical points.
struct ExpMonomialNorms {
  double f, df, d2f;
};

inline ExpMonomialNorms expmono_sup_norms(double c, double nu, double T) {
  const double ac = std::abs(c);
  const auto f = [&](double t) { return ac * t * t * std::exp(-nu * t); };
  const auto df = [&](double t) {
    return ac * std::abs(2.0 * t - nu * t * t) * std::exp(-nu * t);
  };
  const auto d2f = [&](double t) {
    return ac * std::abs(2.0 - 4.0 * nu * t + nu * nu * t * t) * std::exp(-nu * t);
  };
  const auto sup_at = [&](auto&& fn, std::initializer_list<double> candidates) {
    double best = 0.0;
    for (double t : candidates)
      if (t >= 0.0 && t <= T) best = std::max(best, fn(t));
    return best;
  };
  const double s2 = std::sqrt(2.0), s3 = std::sqrt(3.0);
  return {sup_at(f, {0.0, 2.0 / nu, T}),
          sup_at(df, {0.0, (2.0 - s2) / nu, (2.0 + s2) / nu, T}),
          sup_at(d2f, {0.0, (3.0 - s3) / nu, (3.0 + s3) / nu, T})};
}

}  // namespace detail

inline double c_T_bound(const Geometry& g, const SourceTerm& source) {
  const double shape = 1.0 / 3.0 + 2.0 / (3.0 * pi);
  if (const auto* m = std::get_if<Monomial>(&source))
    return shape * std::pow(g.T, m->r) * g.a_U * g.a_U +
           std::pow(g.T, m->r + 1) / (m->r + 1.0);
  const double c_T = shape * g.a_U * g.a_U + g.T;
  if (const auto* e = std::get_if<ExpMonomial>(&source))
    return c_T * detail::expmono_sup_norms(e->c, e->nu, g.T).f;
  return c_T * detail::sup_abs_on_grid(std::get<Generic>(source).f, g.T);
}

inline double c_max_bound(const Geometry& g, const SourceTerm& source) {
  if (const auto* m = std::get_if<Monomial>(&source)) {
    const int r = m->r;
    if (r < 2)
      throw RegularityError("c_max_bound: monomial needs r >= 2 (f'(0) = 0)");
    const double T = g.T;
    if (T >= r + 1.0)
      return std::pow(T, r + 1) / g.a_L + std::pow(T, r) * g.a_U / 3.0;
    const double first = std::pow(T, r - 1) *
                         std::max({T * T / (r + 1.0), T, static_cast<double>(r)});
    const double second = std::pow(T, r - 2) *
                          std::max({T * T, r * T, r * (r - 1.0)});
    return first / g.a_L + g.a_U * second / 3.0;
  }
  const double c_max = std::max(g.T, 1.0) / g.a_L + g.a_U / 3.0;
  if (const auto* e = std::get_if<ExpMonomial>(&source)) {
    const auto n = detail::expmono_sup_norms(e->c, e->nu, g.T);
    return c_max * std::max({n.f, n.df, n.d2f});
  }
  const auto& gen = std::get<Generic>(source);
  if (!gen.df || !gen.d2f)
    throw RegularityError("c_max_bound: generic source needs df and d2f");
  const double norm = std::max({detail::sup_abs_on_grid(gen.f, g.T),
                                detail::sup_abs_on_grid(gen.df, g.T),
                                detail::sup_abs_on_grid(gen.d2f, g.T)});
  return c_max * norm;
}

// ============================================================================
// Admissibility of the base frequency
// ============================================================================

inline double admissibility_F(const CertificationParams& p, const Geometry& g) {
  return 3.0 * g.a_U / (4.0 * g.T) *
         (1.0 + std::sqrt(1.0 + 8.0 * g.T * p.mu / (9.0 * g.a_U * g.a_U)));
}

inline double log_admissibility_G(const CertificationParams& p, const Geometry& g,
                                  double tau) {
  return -g.T * tau * tau + 3.0 * g.a_U * tau + p.mu * std::log(tau) +
         std::log(p.c_T) - std::log(2.0 * p.c_mu);
}

inline double admissibility_G(const CertificationParams& p, const Geometry& g,
                              double tau) {
  return std::exp(log_admissibility_G(p, g, tau));
}

inline double admissibility_H(const CertificationParams& p, const Geometry& g,
                              double tau) {
  const double decay = std::pow(tau, -p.delta) + std::pow(tau, -(2.0 + p.delta));
  return g.T * g.T * g.T * p.c_max / (24.0 * p.c_mu * (1.0 - p.epsilon)) *
         decay * decay;
}

/// Report of the three tau0 checks with their margins; failures are reported,
/// never thrown.
struct BaseFrequencyReport {
  double f_value, g_value, h_value;  ///< F(T), G(tau0), H(tau0)
  bool f_ok, g_ok, h_ok;             ///< F <= tau0, G <= eps, H <= eta
  double f_margin, g_margin, h_margin;
  bool all_ok() const { return f_ok && g_ok && h_ok; }
};

inline BaseFrequencyReport check_base_frequency(const CertificationParams& p,
                                                const Geometry& g) {
  p.validate();
  BaseFrequencyReport rep{};
  rep.f_value = admissibility_F(p, g);
  rep.g_value = admissibility_G(p, g, p.tau0);
  rep.h_value = admissibility_H(p, g, p.tau0);
  rep.f_ok = rep.f_value <= p.tau0;
  rep.g_ok = rep.g_value <= p.epsilon;
  rep.h_ok = rep.h_value <= p.eta;
  rep.f_margin = p.tau0 - rep.f_value;
  rep.g_margin = p.epsilon - rep.g_value;
  rep.h_margin = p.eta - rep.h_value;
  return rep;
}

// ============================================================================
// Sampling threshold and certified frequency ceiling
// ============================================================================

inline double log_sample_count_threshold(const CertificationParams& p,
                                         const Geometry& g, double tau) {
  return g.a_U * tau + 0.5 * (5.0 + p.mu + 2.0 * p.delta) * std::log(tau);
}

/// N_t^delta(tau) = floor(e^{a_U tau} tau^{(5+mu+2delta)/2}) + 1, computed in
/// log space. Values within one ulp of an integer round up so the threshold
/// stays a safe sample count; results past the int64 range raise
/// MagnitudeError carrying the log.
inline std::int64_t sample_count_threshold(const CertificationParams& p,
                                           const Geometry& g, double tau) {
  if (!(tau > 0.0))
    throw std::invalid_argument("sample_count_threshold: need tau > 0");
  const double log_v = log_sample_count_threshold(p, g, tau);
  constexpr double kLogInt64Max = 43.668;  // log(2^63 - 1) rounded down
  if (log_v > kLogInt64Max)
    throw MagnitudeError("sample_count_threshold: exceeds 64-bit range", log_v);
  const double v = std::exp(log_v);
  const double nearest = std::round(v);
  const double ulp = std::nextafter(v, std::numeric_limits<double>::infinity()) - v;
  if (std::abs(v - nearest) <= ulp)
    return static_cast<std::int64_t>(nearest) + 1;
  return static_cast<std::int64_t>(std::floor(v)) + 1;
}

/// Largest tau >= tau0 whose sampling threshold still fits under n_t, located
/// by doubling then bisection to 1e-6 absolute. Throws InfeasibleError when
/// n_t is already below the threshold at tau0.
inline double max_certified_frequency(const CertificationParams& p,
                                      const Geometry& g, std::int64_t n_t) {
  p.validate();
  if (n_t < 1)
    throw std::invalid_argument("max_certified_frequency: need N_t >= 1");
  const double log_budget = std::log(static_cast<double>(n_t));
  const auto feasible = [&](double tau) {
    const double log_v = log_sample_count_threshold(p, g, tau);
    if (log_v > 43.0) return log_v <= log_budget;  // past int64, compare logs
    return sample_count_threshold(p, g, tau) <= n_t;
  };
  if (!feasible(p.tau0))
    throw InfeasibleError(
        "max_certified_frequency: N_t below the sampling threshold at tau0");
  double lo = p.tau0, hi = 2.0 * p.tau0;
  while (feasible(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e9)
      throw std::invalid_argument("max_certified_frequency: budget never binds");
  }
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? lo : hi) = mid;
  }
  return lo;
}

// ============================================================================
// Certified error bounds
// ============================================================================

/// The three certified bounds at frequency tau:
///  - continuous: |a(tau) - a| (exact-data recovery),
///  - sampling:   |a_{N_t}(tau) - a(tau)| for N_t past the threshold,
///  - combined:   |a_{N_t}(tau) - a| on the trusted region.
struct CertifiedBounds {
  double continuous;
  double sampling;
  double combined;
};

inline CertifiedBounds certified_error_bounds(const CertificationParams& p,
                                              const Geometry& g, double tau) {
  p.validate();
  if (!(tau > 0.0))
    throw std::invalid_argument("certified_error_bounds: need tau > 0");
  const double x = 2.0 * g.a_L * tau;
  const double gap = (x > kExpCutoff) ? 0.0 : -std::log1p(-std::exp(-x)) / (2.0 * tau);
  const double log_model = -g.T * tau * tau + 3.0 * g.a_U * tau +
                           (p.mu - 1.0) * std::log(tau) + std::log(p.c_T) -
                           std::log(4.0 * p.c_mu * (1.0 - p.epsilon));
  CertifiedBounds b{};
  b.continuous = gap + std::exp(log_model);
  b.sampling = discrete_gap_bound(p, g, tau);
  b.combined = gap + p.epsilon / (2.0 * tau * (1.0 - p.epsilon)) +
               p.eta / (2.0 * tau * (1.0 - p.eta));
  return b;
}

// ============================================================================
// Frequency grid and trusted regions
// ============================================================================

/// Arithmetic sweep grid tau = tau_start, tau_start + step, ..., <= tau_end.
struct FrequencyGrid {
  double tau_start = 1.0;
  double tau_step = 0.5;
  double tau_end = 15.0;

  void validate() const {
    if (!(tau_start > 0.0) || !(tau_step > 0.0) || !(tau_end >= tau_start))
      throw std::invalid_argument(
          "FrequencyGrid: need tau_start > 0, step > 0, tau_end >= tau_start");
  }
  std::size_t size() const {
    validate();
    return static_cast<std::size_t>(
               std::floor((tau_end - tau_start) / tau_step + 1e-9)) + 1;
  }
  double at(std::size_t i) const { return tau_start + static_cast<double>(i) * tau_step; }
};

/// A frequency interval on which the recovery is certified (theorems) or
/// observed (grid scan) to stay within `error_bound` of the true endpoint.
struct TrustedRegion {
  enum class Kind { theoretical, empirical };

  double tau_lo = 0.0;
  double tau_hi = 0.0;
  double error_bound = 0.0;
  Kind kind = Kind::empirical;
  double grid_step = 0.0;  ///< empirical regions only
  bool is_empty = true;

  static TrustedRegion none(double bound, Kind k, double step = 0.0) {
    if (!(bound > 0.0))
      throw std::invalid_argument("TrustedRegion: need error_bound > 0");
    TrustedRegion r;
    r.error_bound = bound;
    r.kind = k;
    r.grid_step = step;
    return r;
  }
  static TrustedRegion interval(double lo, double hi, double bound, Kind k,
                                double step = 0.0) {
    if (!(lo <= hi)) throw std::invalid_argument("TrustedRegion: need lo <= hi");
    if (!(bound > 0.0))
      throw std::invalid_argument("TrustedRegion: need error_bound > 0");
    TrustedRegion r;
    r.tau_lo = lo;
    r.tau_hi = hi;
    r.error_bound = bound;
    r.kind = k;
    r.grid_step = step;
    r.is_empty = false;
    return r;
  }
};

// ============================================================================
// Empirical scan
// ============================================================================

/// One grid frequency of a discrete sweep.
struct SweepPoint {
  double tau;
  double f_hat;
  double q;      ///< trapezoid value Q_{N_t}
  double i_nt;   ///< discrete indicator
  std::optional<double> a_nt;
};

/// Discrete endpoint estimates across the grid for one sample count.
///
/// `flux_on_grid` selects how f_hat enters the recovery: true (scan protocol)
/// transforms the flux with the same trapezoid on the same grid as the data;
/// false uses the exact transform recursion. `stream` avoids materialising
/// the N_t+1 samples: a single pass over the time grid feeds every
/// frequency's accumulator, which performs the exact same per-frequency
/// operation sequence as the buffered path (identical results, O(grid)
/// memory).
inline std::vector<SweepPoint> discrete_frequency_sweep(
    const Geometry& g, const SourceTerm& source, SeriesTruncation trunc,
    std::int64_t n_t, const FrequencyGrid& grid, bool stream = false,
    bool flux_on_grid = true) {
  grid.validate();
  if (n_t < 1)
    throw std::invalid_argument("discrete_frequency_sweep: need N_t >= 1");
  const std::size_t m = grid.size();
  std::vector<SweepPoint> points(m);
  for (std::size_t i = 0; i < m; ++i) {
    points[i].tau = grid.at(i);
    points[i].f_hat = flux_on_grid
                          ? laplace_transform_sampled(source, points[i].tau, g.T, n_t)
                          : laplace_transform(source, points[i].tau, g.T);
  }
  if (!stream) {
    const TraceSamples samples =
        sample_trace(g, source, static_cast<int>(n_t), trunc);
    for (std::size_t i = 0; i < m; ++i) {
      const DiscreteIndicator d =
          discrete_indicator(samples, points[i].f_hat, points[i].tau);
      points[i].q = d.q;
      points[i].i_nt = d.i_nt;
      points[i].a_nt = d.a_nt;
    }
    return points;
  }
  auto trace = make_trace_evaluator(g, source, trunc);
  std::vector<KahanSum> acc(m);
  const double L = static_cast<double>(n_t);
  for (std::int64_t j = 0; j <= n_t; ++j) {
    const double tj = static_cast<double>(j) * g.T / L;
    const double uj = trace(tj);
    const double endpoint_factor = (j == 0 || j == n_t) ? 0.5 : 1.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double arg = points[i].tau * points[i].tau * tj;
      const double w = (arg > kExpCutoff) ? 0.0 : std::exp(-arg);
      acc[i].add(endpoint_factor * w * uj);
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    points[i].q = g.T / L * acc[i].value();
    points[i].i_nt = indicator_value(points[i].q, points[i].f_hat, points[i].tau);
    points[i].a_nt = recover_endpoint(points[i].i_nt, points[i].f_hat, points[i].tau);
  }
  return points;
}

/// Longest contiguous run of grid points with |a_nt - a| <= bound (estimates
/// that failed to evaluate count as outside). Equal-length runs resolve to
/// the smaller tau_lo; an empty run yields the designated empty region.
inline TrustedRegion region_from_sweep(std::span<const SweepPoint> points,
                                       double a_true, double bound,
                                       double grid_step) {
  std::size_t best_start = 0, best_len = 0, run_start = 0, run_len = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const bool inside =
        points[i].a_nt.has_value() && std::abs(*points[i].a_nt - a_true) <= bound;
    if (inside) {
      if (run_len == 0) run_start = i;
      ++run_len;
      if (run_len > best_len) {
        best_len = run_len;
        best_start = run_start;
      }
    } else {
      run_len = 0;
    }
  }
  if (best_len == 0)
    return TrustedRegion::none(bound, TrustedRegion::Kind::empirical, grid_step);
  return TrustedRegion::interval(points[best_start].tau,
                                 points[best_start + best_len - 1].tau, bound,
                                 TrustedRegion::Kind::empirical, grid_step);
}

/// Scan the grid at one sample count and return the maximal trusted run.
inline TrustedRegion empirical_region(const Geometry& g, const SourceTerm& source,
                                      SeriesTruncation trunc, std::int64_t n_t,
                                      double bound, const FrequencyGrid& grid,
                                      bool stream = false,
                                      bool flux_on_grid = true) {
  const auto points =
      discrete_frequency_sweep(g, source, trunc, n_t, grid, stream, flux_on_grid);
  return region_from_sweep(points, g.a, bound, grid.tau_step);
}

}  // namespace enclosure
