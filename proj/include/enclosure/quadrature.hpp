#pragma once

// Globally adaptive Gauss-Kronrod (G7,K15) quadrature. Plumbing used by the
// generic-source trace evaluator and the generic flux transform; the closed
// forms elsewhere never call into this.

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <vector>

#include "enclosure/types.hpp"

namespace enclosure {

struct QuadratureResult {
  double value;
  double error;  ///< a-posteriori estimate |K15 - G7| summed over intervals
};

namespace detail {

// 15-point Kronrod abscissae on [-1,1] (positive half) and weights, with the
// embedded 7-point Gauss weights.
inline constexpr double kGk15X[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993945, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0};
inline constexpr double kGk15W[8] = {
    0.02293532201052922, 0.06309209262997855, 0.10479001032225018,
    0.14065325971552591, 0.16900472663926790, 0.19035057806478540,
    0.20443294007529889, 0.20948214108472782};
inline constexpr double kG7W[4] = {0.12948496616886969, 0.27970539148927666,
                                   0.38183005050511894, 0.41795918367346938};

struct Segment {
  double lo, hi, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk15(const F& f, double lo, double hi) {
  const double c = 0.5 * (lo + hi);
  const double h = 0.5 * (hi - lo);
  const double fc = f(c);
  double kronrod = kGk15W[7] * fc;
  double gauss = kG7W[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double dx = h * kGk15X[i];
    const double fsum = f(c - dx) + f(c + dx);
    kronrod += kGk15W[i] * fsum;
    if (i % 2 == 1) gauss += kG7W[i / 2] * fsum;
  }
  kronrod *= h;
  gauss *= h;
  return {lo, hi, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

/// Integrate f over [lo, hi] to the requested absolute tolerance by bisecting
/// the interval with the worst local error estimate. Throws QuadratureError
/// (carrying the achieved estimate) if the budget of subdivisions runs out.
template <class F>
QuadratureResult integrate_adaptive(const F& f, double lo, double hi,
                                    double abs_tol, int max_intervals = 2000) {
  if (hi == lo) return {0.0, 0.0};
  std::priority_queue<detail::Segment> segs;
  segs.push(detail::gk15(f, lo, hi));
  double total_value = segs.top().value;
  double total_error = segs.top().error;
  int n = 1;
  while (total_error > abs_tol && n < max_intervals) {
    detail::Segment worst = segs.top();
    segs.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (mid <= worst.lo || mid >= worst.hi) {
      segs.push(worst);  // interval at ulp resolution, cannot split further
      break;
    }
    detail::Segment left = detail::gk15(f, worst.lo, mid);
    detail::Segment right = detail::gk15(f, mid, worst.hi);
    total_value += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    segs.push(left);
    segs.push(right);
    n += 2;
  }
  // Recompute the totals from the surviving segments: the incremental updates
  // above can leave stale rounding in long runs.
  KahanSum v, e;
  while (!segs.empty()) {
    v.add(segs.top().value);
    e.add(segs.top().error);
    segs.pop();
  }
  if (e.value() > abs_tol)
    throw QuadratureError("integrate_adaptive: tolerance not reached", e.value());
  return {v.value(), e.value()};
}

}  // namespace enclosure
