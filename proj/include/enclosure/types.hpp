#pragma once

// Core domain types for the 1-D endpoint-recovery library: rod geometry,
// the supported Neumann flux shapes, series truncation, and the constants
// that feed the certified-region machinery.

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <variant>

namespace enclosure {

inline constexpr double pi = 3.14159265358979323846;

// ============================================================================
// Errors
// ============================================================================

/// Flux decay rate coincides (within tolerance) with a Neumann eigenvalue,
/// so the closed-form trace is singular.
struct SingularSourceError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Source does not meet the smoothness/vanishing conditions a bound requires.
struct RegularityError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Requested certified region cannot exist for the given sample count.
struct InfeasibleError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Adaptive quadrature could not reach the requested tolerance. Carries the
/// error estimate that was actually achieved.
struct QuadratureError : std::runtime_error {
  double achieved;
  QuadratureError(const std::string& what, double achieved_error)
      : std::runtime_error(what), achieved(achieved_error) {}
};

/// Integer-valued result does not fit the return type. Carries the natural
/// logarithm of the value so callers can still reason about magnitude.
struct MagnitudeError : std::overflow_error {
  double log_value;
  MagnitudeError(const std::string& what, double log_val)
      : std::overflow_error(what), log_value(log_val) {}
};

/// Configuration text is invalid; `line` is 1-based (0 when not tied to a
/// particular line).
struct ConfigError : std::runtime_error {
  std::size_t line;
  explicit ConfigError(const std::string& what, std::size_t line_no = 0)
      : std::runtime_error(what), line(line_no) {}
};

// ============================================================================
// Geometry
// ============================================================================

/// Rod geometry and measurement horizon. The insulated end sits at x = a
/// with the a-priori bracket [a_L, a_U]; boundary data lives on [0, T].
struct Geometry {
  double a;    ///< rod length (used to synthesize data and judge errors)
  double a_L;  ///< lower a-priori bound, 0 < a_L <= a
  double a_U;  ///< upper a-priori bound, a <= a_U
  double T;    ///< final observation time, > 0

  Geometry(double rod_length, double final_time)
      : Geometry(rod_length, rod_length, rod_length, final_time) {}

  Geometry(double rod_length, double lower, double upper, double final_time)
      : a(rod_length), a_L(lower), a_U(upper), T(final_time) {
    if (!(a_L > 0.0 && a_L <= a && a <= a_U))
      throw std::invalid_argument("Geometry: need 0 < a_L <= a <= a_U");
    if (!(T > 0.0)) throw std::invalid_argument("Geometry: need T > 0");
  }
};

// ============================================================================
// Source terms (Neumann flux f at x = 0)
// ============================================================================

/// f(t) = t^r, r >= 0.
struct Monomial {
  int r = 0;
};

/// f(t) = c * t^2 * exp(-nu*t), nu > 0 and away from every eigenvalue.
struct ExpMonomial {
  double c = 1.0;
  double nu = 1.0;
};

/// User-supplied flux. `df`/`d2f` are optional exact derivatives; when both
/// are present the series evaluator switches to a tail-corrected form whose
/// truncation error decays like N^-5 instead of N^-1 (requires f in
/// W^{2,inf}; the vanishing conditions f(0) = f'(0) = 0 are only needed for
/// the sampling theorems, not for evaluation).
struct Generic {
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::function<double(double)> d2f;
};

using SourceTerm = std::variant<Monomial, ExpMonomial, Generic>;

/// Pointwise flux value for any variant.
inline double source_value(const SourceTerm& s, double t) {
  if (const auto* m = std::get_if<Monomial>(&s)) {
    double p = 1.0;
    for (int i = 0; i < m->r; ++i) p *= t;
    return p;
  }
  if (const auto* e = std::get_if<ExpMonomial>(&s))
    return e->c * t * t * std::exp(-e->nu * t);
  return std::get<Generic>(s).f(t);
}

// ============================================================================
// Series truncation
// ============================================================================

/// Number of eigenmodes retained in the separated-series solution.
struct SeriesTruncation {
  int modes;
  explicit SeriesTruncation(int n = 1000) : modes(n) {
    if (modes < 1) throw std::invalid_argument("SeriesTruncation: need N >= 1");
  }
};

// ============================================================================
// Certification constants
// ============================================================================

/// Everything the certified-region theorems consume. `c_T` and `c_max` are
/// the norm-scaled products C_T*||f||_inf and C_max*||f||_{W^{2,inf}} (for
/// monomial fluxes, the sharper per-exponent constants); `mu`/`c_mu` bound
/// the flux transform from below, |f_hat(tau)| >= c_mu * tau^-mu.
struct CertificationParams {
  double mu;
  double c_mu;
  double c_T;
  double c_max;
  double delta;    ///< oversampling exponent, > 0
  double tau0;     ///< base frequency, > 0
  double epsilon;  ///< continuous-recovery slack, in (0,1)
  double eta;      ///< sampling slack, in (0,1)

  void validate() const {
    if (!(mu > 0.0 && c_mu > 0.0 && c_T > 0.0 && c_max > 0.0))
      throw std::invalid_argument("CertificationParams: constants must be positive");
    if (!(delta > 0.0)) throw std::invalid_argument("CertificationParams: need delta > 0");
    if (!(tau0 > 0.0)) throw std::invalid_argument("CertificationParams: need tau0 > 0");
    if (!(epsilon > 0.0 && epsilon < 1.0))
      throw std::invalid_argument("CertificationParams: need 0 < epsilon < 1");
    if (!(eta > 0.0 && eta < 1.0))
      throw std::invalid_argument("CertificationParams: need 0 < eta < 1");
  }
};

// ============================================================================
// Small numerics helpers shared across modules
// ============================================================================

/// Compensated (Kahan) accumulator. Keeps long same-order sums at a few ulp
/// regardless of length, which the 10^6-sample trapezoid sums need.
struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    const double y = x - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

/// exp(-x) flushes to exactly +0.0 in IEEE double well below x = 745.2; terms
/// beyond this threshold are skipped since they contribute nothing.
inline constexpr double kExpCutoff = 760.0;

}  // namespace enclosure
