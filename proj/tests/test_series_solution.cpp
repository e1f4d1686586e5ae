#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "enclosure/series_solution.hpp"

using namespace enclosure;

namespace {

// Independent evaluation of the three displayed closed traces
//   r=0: -t/a - a/3 + (2/a) sum e^{-lam t}/lam
//   r=1: -t^2/(2a) - a t/3 + a^3/45 - (2/a) sum e^{-lam t}/lam^2
//   r=2: -t^3/(3a) - a t^2/3 + 2 a^3 t/45 - 4 a^5/945 + (4/a) sum e^{-lam t}/lam^3
// used as the oracle for the general monomial formula.
double displayed_trace(const Geometry& g, int r, double t, int n_modes) {
  const double a = g.a;
  double series = 0.0;
  for (int k = n_modes; k >= 1; --k) {
    const double lam = eigenvalue(g, k);
    series += std::exp(-lam * t) * std::pow(lam, -(r + 1));
  }
  switch (r) {
    case 0: return -t / a - a / 3.0 + 2.0 / a * series;
    case 1: return -t * t / (2.0 * a) - a * t / 3.0 + std::pow(a, 3) / 45.0 -
                   2.0 / a * series;
    case 2: return -t * t * t / (3.0 * a) - a * t * t / 3.0 +
                   2.0 * std::pow(a, 3) * t / 45.0 - 4.0 * std::pow(a, 5) / 945.0 +
                   4.0 / a * series;
    default: FAIL("unsupported r"); return 0.0;
  }
}

Generic generic_monomial(int r) {
  return Generic{
      [r](double t) { return std::pow(t, r); },
      [r](double t) { return r == 0 ? 0.0 : r * std::pow(t, r - 1); },
      [r](double t) { return r <= 1 ? 0.0 : r * (r - 1.0) * std::pow(t, r - 2); }};
}

}  // namespace

TEST_CASE("eigenvalues") {
  CHECK(eigenvalue(Geometry(1.0, 5.0), 1) == doctest::Approx(pi * pi).epsilon(1e-15));
  CHECK(eigenvalue(Geometry(2.0, 5.0), 2) == doctest::Approx(pi * pi).epsilon(1e-15));
  CHECK(eigenvalue(Geometry(1.0, 5.0), 3) ==
        doctest::Approx(9.0 * pi * pi).epsilon(1e-15));
  CHECK_THROWS_AS(eigenvalue(Geometry(1.0, 5.0), 0), std::invalid_argument);
}

TEST_CASE("even zeta values") {
  CHECK(zeta_even(2) == doctest::Approx(pi * pi / 6.0).epsilon(1e-15));
  CHECK(zeta_even(4) == doctest::Approx(std::pow(pi, 4) / 90.0).epsilon(1e-15));
  CHECK(zeta_even(6) == doctest::Approx(std::pow(pi, 6) / 945.0).epsilon(1e-15));
  // direct-series fallback agrees with the closed forms where both exist
  double direct = 1.0;
  for (int n = 2; n < 60; ++n) direct += std::pow(n, -22);
  CHECK(zeta_even(22) == doctest::Approx(direct).epsilon(1e-15));
  CHECK_THROWS_AS(zeta_even(3), std::invalid_argument);
  CHECK_THROWS_AS(zeta_even(0), std::invalid_argument);
}

TEST_CASE("convolution coefficients") {
  CHECK(b_coeff(2, 2) == 1.0);
  CHECK(b_coeff(0, 2) == 2.0);
  CHECK(b_coeff(1, 2) == -2.0);
  CHECK_THROWS_AS(b_coeff(3, 2), std::domain_error);
  CHECK_THROWS_AS(b_coeff(-1, 2), std::domain_error);
}

TEST_CASE("monomial trace matches the displayed low-order closed forms") {
  for (double a : {1.0, 2.0}) {
    const Geometry g(a, 5.0);
    const SeriesTruncation trunc{1000};
    for (int r : {0, 1, 2}) {
      MonomialTrace trace(g, r, trunc);
      for (double t : {0.0, 0.37, 1.0, 2.5, 5.0}) {
        const double expected = displayed_trace(g, r, t, trunc.modes);
        CHECK(trace(t) ==
              doctest::Approx(expected).epsilon(1e-13).scale(std::abs(expected) + 1.0));
      }
    }
  }
}

TEST_CASE("zero-time anchor is exactly the retained-series tail") {
  const Geometry g(1.0, 5.0);
  // r=0 at t=0: the closed form evaluates to -(2/a) * tail of sum 1/lam_k
  for (int n : {10, 100, 1000}) {
    const double u0 = dirichlet_trace_monomial(g, 0, 0.0, SeriesTruncation{n});
    CHECK(std::abs(u0) <= truncation_bound_monomial(g, 0, n, 0.0));
    // tail is essentially (a/pi)^2 / n
    CHECK(std::abs(u0) == doctest::Approx(2.0 / (pi * pi * n)).epsilon(0.1));
  }
  // r=1 and r=2 anchors sit below their (much smaller) tail bounds; the
  // closed form assembles the anchor from O(a^5/945)-sized terms, so allow
  // the roundoff floor of that subtraction
  CHECK(std::abs(dirichlet_trace_monomial(g, 1, 0.0, SeriesTruncation{1000})) <=
        truncation_bound_monomial(g, 1, 1000, 0.0) + 1e-18);
  CHECK(std::abs(dirichlet_trace_monomial(g, 2, 0.0, SeriesTruncation{1000})) <=
        truncation_bound_monomial(g, 2, 1000, 0.0) + 1e-18);
}

TEST_CASE("r=2 constant term is -4a^5/945") {
  // evaluate at t=0 and strip the retained series: what remains is the
  // zeta-closed constant
  for (double a : {1.0, 2.0}) {
    const Geometry g(a, 5.0);
    const SeriesTruncation trunc{500};
    double series = 0.0;
    for (int k = trunc.modes; k >= 1; --k)
      series += std::pow(eigenvalue(g, k), -3);
    const double u0 = dirichlet_trace_monomial(g, 2, 0.0, trunc);
    CHECK(u0 - 4.0 / a * series ==
          doctest::Approx(-4.0 * std::pow(a, 5) / 945.0).epsilon(1e-12));
  }
}

TEST_CASE("monomial sign: boundary temperature stays nonpositive") {
  const Geometry g(1.0, 5.0);
  const SeriesTruncation trunc{1000};
  for (int r : {0, 1, 2}) {
    MonomialTrace trace(g, r, trunc);
    for (int j = 0; j <= 50; ++j) {
      const double t = g.T * j / 50.0;
      CHECK(trace(t) <= truncation_bound_monomial(g, r, trunc.modes, t));
    }
  }
}

TEST_CASE("exp-monomial trace") {
  const Geometry g(1.0, 5.0);

  SUBCASE("vanishes at t = 0 within the truncation bound") {
    const double u0 = dirichlet_trace_expmono(g, 1.0, 2.0, 0.0, SeriesTruncation{100});
    CHECK(std::abs(u0) <= truncation_bound_generic(g, 1.0, 100, true));
  }
  SUBCASE("rejects nu at an eigenvalue") {
    CHECK_THROWS_AS(
        dirichlet_trace_expmono(g, 1.0, eigenvalue(g, 1), 1.0, SeriesTruncation{10}),
        SingularSourceError);
    CHECK_THROWS_AS(dirichlet_trace_expmono(g, 1.0, eigenvalue(g, 3) + 1e-12, 1.0,
                                            SeriesTruncation{10}),
                    SingularSourceError);
  }
  SUBCASE("rejects nonpositive decay rates") {
    CHECK_THROWS_AS(dirichlet_trace_expmono(g, 1.0, 0.0, 1.0, SeriesTruncation{10}),
                    std::invalid_argument);
  }
  SUBCASE("amplitude scales linearly") {
    const SeriesTruncation trunc{100};
    const double base = dirichlet_trace_expmono(g, 1.0, 2.0, 1.3, trunc);
    CHECK(dirichlet_trace_expmono(g, std::exp(2.0), 2.0, 1.3, trunc) ==
          doctest::Approx(std::exp(2.0) * base).epsilon(1e-15));
  }
}

TEST_CASE("generic trace: plain route") {
  const Geometry g(1.0, 5.0);
  const SeriesTruncation trunc{1000};

  SUBCASE("zero source gives exactly zero") {
    Generic zero{[](double) { return 0.0; }, nullptr, nullptr};
    CHECK(dirichlet_trace_generic(g, zero, 2.5, trunc) == 0.0);
  }
  SUBCASE("f = t agrees with the displayed closed form to the L-inf tail") {
    Generic lin{[](double t) { return t; }, nullptr, nullptr};
    const double got = dirichlet_trace_generic(g, lin, 5.0, trunc);
    const double closed = displayed_trace(g, 1, 5.0, 100000);
    CHECK(std::abs(got - closed) <= truncation_bound_generic(g, 5.0, trunc.modes, false));
  }
}

TEST_CASE("generic trace: tail-corrected route matches closed forms to 1e-10") {
  const SeriesTruncation trunc{1000};
  for (double a : {1.0, 2.0}) {
    const Geometry g(a, 5.0);
    for (int r : {0, 1, 2}) {
      const Generic src = generic_monomial(r);
      GenericTrace trace(g, src, trunc);
      REQUIRE(trace.tail_corrected());
      for (double t : {0.0, 1.0, 2.5, 5.0}) {
        const double closed = dirichlet_trace_monomial(g, r, t, trunc);
        CHECK(std::abs(trace(t) - closed) <= 1e-10);
      }
    }
  }
}

TEST_CASE("generic trace: exp-monomial cross-path") {
  const Geometry g(1.0, 5.0);
  const double c = std::exp(2.0), nu = 2.0;
  const Generic src{
      [=](double t) { return c * t * t * std::exp(-nu * t); },
      [=](double t) { return c * (2.0 * t - nu * t * t) * std::exp(-nu * t); },
      [=](double t) {
        return c * (2.0 - 4.0 * nu * t + nu * nu * t * t) * std::exp(-nu * t);
      }};
  SUBCASE("N = 1000: both routes within 1e-10") {
    const SeriesTruncation trunc{1000};
    GenericTrace oracle(g, src, trunc);
    ExpMonomialTrace closed(g, c, nu, trunc);
    for (double t : {0.0, 0.5, 1.0, 2.5, 5.0})
      CHECK(std::abs(oracle(t) - closed(t)) <= 1e-10);
  }
  SUBCASE("N = 100 at t = 1 (the derivative zero) still within 1e-10") {
    const SeriesTruncation trunc{100};
    CHECK(std::abs(dirichlet_trace_generic(g, src, 1.0, trunc) -
                   dirichlet_trace_expmono(g, c, nu, 1.0, trunc)) <= 1e-10);
  }
}

TEST_CASE("monomial truncation bound") {
  const Geometry g(1.0, 5.0);
  CHECK(truncation_bound_monomial(g, 0, 1, 0.0) ==
        doctest::Approx(2.0 / (pi * pi)).epsilon(1e-15));
  CHECK(truncation_bound_monomial(g, 2, 1000, 0.0) <= 8.4e-19);
  CHECK(truncation_bound_monomial(g, 2, 1000, 0.0) >= 8.2e-19);
  // hyperconvergent branch only kicks in past the threshold time and only
  // ever shrinks the bound
  const double t_on = 1.0 * std::log(2.0) / (pi * pi * 5.0);
  CHECK(truncation_bound_monomial(g, 0, 1, 2.0 * t_on) <=
        truncation_bound_monomial(g, 0, 1, 0.0));
}

TEST_CASE("generic truncation bound values") {
  const Geometry g(1.0, 5.0);
  CHECK(truncation_bound_generic(g, 1.0, 10, false) ==
        doctest::Approx(2.0 / (10.0 * pi * pi)).epsilon(1e-15));
  CHECK(truncation_bound_generic(g, 1.0, 10, true) ==
        doctest::Approx(2.0 / (1000.0 * std::pow(pi, 4))).epsilon(1e-15));
}

TEST_CASE("measured truncation error sits under the bounds (moderate reference)") {
  const Geometry g(1.0, 5.0);
  const SeriesTruncation ref{100000};
  for (int r : {0, 1, 2}) {
    MonomialTrace reference(g, r, ref);
    for (int n : {10, 100}) {
      MonomialTrace coarse(g, r, SeriesTruncation{n});
      for (double t : {0.0, 1e-3, 0.1, 1.0, 5.0}) {
        const double measured = std::abs(coarse(t) - reference(t));
        CHECK(measured <= truncation_bound_monomial(g, r, n, t) * (1.0 + 1e-9) + 1e-18);
      }
    }
  }
}

TEST_CASE("monotone truncation: doubling N shrinks the update") {
  const Geometry g(1.0, 5.0);
  double prev = 1e300;
  for (int n : {10, 20, 40, 80}) {
    MonomialTrace coarse(g, 2, SeriesTruncation{n});
    MonomialTrace fine(g, 2, SeriesTruncation{2 * n});
    const double update = std::abs(coarse(0.0) - fine(0.0));
    CHECK(update <= truncation_bound_monomial(g, 2, n, 0.0));
    CHECK(update < prev);
    prev = update;
  }
}

TEST_CASE("sampled traces") {
  const Geometry g(1.0, 5.0);
  SUBCASE("five samples for N_t = 4, starting at zero") {
    const TraceSamples s = sample_trace(g, Monomial{2}, 4, SeriesTruncation{100});
    REQUIRE(s.t.size() == 5);
    CHECK(s.t.front() == 0.0);
    CHECK(s.t.back() == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(std::abs(s.u.front()) <= truncation_bound_monomial(g, 2, 100, 0.0));
    CHECK(s.grid_skew() < 1e-12);
  }
  SUBCASE("monomial samples stay nonpositive up to the truncation bound") {
    const TraceSamples s = sample_trace(g, Monomial{1}, 64, SeriesTruncation{200});
    for (std::size_t j = 0; j < s.u.size(); ++j)
      CHECK(s.u[j] <= truncation_bound_monomial(g, 1, 200, s.t[j]));
  }
  SUBCASE("zero generic source samples to zeros") {
    Generic zero{[](double) { return 0.0; }, nullptr, nullptr};
    const TraceSamples s = sample_trace(g, zero, 8, SeriesTruncation{10});
    for (double u : s.u) CHECK(u == 0.0);
  }
  SUBCASE("validation") {
    CHECK_THROWS_AS(sample_trace(g, Monomial{2}, 0, SeriesTruncation{10}),
                    std::invalid_argument);
    CHECK_THROWS_AS(TraceSamples(g, {0.0, 1.0}, {0.0}), std::invalid_argument);
    CHECK_THROWS_AS(TraceSamples(g, {0.5, 5.0}, {0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(TraceSamples(g, {0.0, 4.0}, {0.0, 0.0}), std::invalid_argument);
  }
}

TEST_CASE("quadrature failure carries the achieved error") {
  // an integrable endpoint singularity the subdivision budget cannot resolve
  const auto spike = [](double t) { return 1.0 / std::sqrt(t); };
  try {
    integrate_adaptive(spike, 0.0, 1.0, 1e-13, 6);
    FAIL("expected QuadratureError");
  } catch (const QuadratureError& e) {
    CHECK(e.achieved > 1e-13);
  }
}
