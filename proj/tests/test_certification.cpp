#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "enclosure/certification.hpp"

using namespace enclosure;

namespace {

CertificationParams reference_params(const Geometry& g, int r, double delta,
                                     double tau0) {
  const auto tc = monomial_transform_constants(r);
  CertificationParams p{tc.mu,  tc.c_mu, c_T_bound(g, Monomial{r}),
                        c_max_bound(g, Monomial{r}), delta, tau0, 0.5, 0.5};
  p.epsilon = admissibility_G(p, g, tau0);
  p.eta = admissibility_H(p, g, tau0);
  return p;
}

// Interior temperature profile x -> u(x,T) for f(t) = t^r from the cosine
// eigenfunction expansion with exact mode integrals,
//   u(x,t) = -(1/a) int_0^t f - (2/a) sum_k cos(k pi x / a) J_k(t),
//   J_k(t) = sum_j b_j(r) t^j / lam^{r+1-j} - b_0(r) e^{-lam t} / lam^{r+1}.
double interior_profile(const Geometry& g, int r, double x, double t, int modes) {
  double series = 0.0;
  for (int k = modes; k >= 1; --k) {
    const double lam = eigenvalue(g, k);
    double jk = 0.0;
    double tpow = 1.0;
    for (int j = 0; j <= r; ++j) {
      jk += b_coeff(j, r) * tpow * std::pow(lam, -(r + 1 - j));
      tpow *= t;
    }
    jk -= b_coeff(0, r) * std::exp(-lam * t) * std::pow(lam, -(r + 1));
    series += std::cos(k * pi * x / g.a) * jk;
  }
  const double f_int = std::pow(t, r + 1) / (r + 1.0);
  return -f_int / g.a - 2.0 / g.a * series;
}

}  // namespace

TEST_CASE("terminal-state bound c_T") {
  const Geometry g(1.0, 5.0);
  SUBCASE("monomial closed value at the reference configuration") {
    CHECK(c_T_bound(g, Monomial{2}) ==
          doctest::Approx((1.0 / 3.0 + 2.0 / (3.0 * pi)) * 25.0 + 125.0 / 3.0)
              .epsilon(1e-14));
  }
  SUBCASE("generic bounded flux uses the sup norm") {
    Generic one{[](double) { return 1.0; }, nullptr, nullptr};
    CHECK(c_T_bound(g, SourceTerm{one}) ==
          doctest::Approx((1.0 / 3.0 + 2.0 / (3.0 * pi)) + 5.0).epsilon(1e-9));
  }
  SUBCASE("measured L1 norm of u(.,T) sits below the bound") {
    // composite Simpson over the interior profile
    const int cells = 2048;
    KahanSum acc;
    for (int i = 0; i <= cells; ++i) {
      const double x = g.a * i / cells;
      const double w = (i == 0 || i == cells) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      acc.add(w * std::abs(interior_profile(g, 2, x, g.T, 2000)));
    }
    const double l1 = g.a / (3.0 * cells) * acc.value();
    CHECK(l1 <= c_T_bound(g, Monomial{2}));
    CHECK(l1 > 0.5 * std::abs(interior_profile(g, 2, 0.0, g.T, 2000)));  // sanity
  }
}

TEST_CASE("trace-regularity bound c_max") {
  const Geometry g(1.0, 5.0);
  SUBCASE("monomial closed value at the reference configuration") {
    CHECK(c_max_bound(g, Monomial{2}) ==
          doctest::Approx(125.0 + 25.0 / 3.0).epsilon(1e-14));
  }
  SUBCASE("low-order monomials are rejected") {
    CHECK_THROWS_AS(c_max_bound(g, Monomial{1}), RegularityError);
    CHECK_THROWS_AS(c_max_bound(g, Monomial{0}), RegularityError);
  }
  SUBCASE("generic sources need both derivatives") {
    Generic f{[](double t) { return t * t; }, nullptr, nullptr};
    CHECK_THROWS_AS(c_max_bound(g, SourceTerm{f}), RegularityError);
  }
  SUBCASE("finite differences of the trace stay under the bound") {
    MonomialTrace trace(g, 2, SeriesTruncation{4000});
    const double bound = c_max_bound(g, Monomial{2});
    const double h = 1e-4;
    for (int i = 1; i <= 40; ++i) {
      const double t = 0.05 + (g.T - 2.0 * h - 0.05) * i / 40.0;
      const double d2 = (trace(t + h) - 2.0 * trace(t) + trace(t - h)) / (h * h);
      const double d1 = (trace(t + h) - trace(t - h)) / (2.0 * h);
      CHECK(std::abs(d2) <= bound);
      CHECK(std::abs(d1) <= bound);
      CHECK(std::abs(trace(t)) <= bound);
    }
  }
  SUBCASE("exp-monomial norm is assembled from exact critical points") {
    // f = t^2 e^{-2t}: sup|f''| = |f''(0)| = 2, so the norm is 2 and
    // c_max = (5 + 1/3) * 2
    CHECK(c_max_bound(g, ExpMonomial{1.0, 2.0}) ==
          doctest::Approx((5.0 + 1.0 / 3.0) * 2.0).epsilon(1e-12));
  }
}

TEST_CASE("base-frequency admissibility at the reference configuration") {
  const Geometry g(1.0, 5.0);
  const CertificationParams p = reference_params(g, 2, 5.0, 3.0);
  const BaseFrequencyReport rep = check_base_frequency(p, g);
  CHECK(rep.f_value == doctest::Approx(0.939).epsilon(1e-3));
  CHECK(rep.f_value <= 1.0);
  CHECK(p.epsilon == doctest::Approx(2.9114e-11).epsilon(1e-3));
  CHECK(std::abs(p.eta - 0.0904) <= 5e-4);
  CHECK(rep.all_ok());
  CHECK(rep.f_margin > 0.0);
  CHECK(rep.g_margin >= 0.0);
  CHECK(rep.h_margin >= 0.0);
}

TEST_CASE("log-space admissibility agrees with direct evaluation where finite") {
  const Geometry g(1.0, 5.0);
  const CertificationParams p = reference_params(g, 2, 5.0, 3.0);
  for (double tau : {1.0, 2.0, 3.0}) {
    const double direct = std::exp(-g.T * tau * tau) * std::exp(3.0 * g.a_U * tau) *
                          std::pow(tau, p.mu) * p.c_T / (2.0 * p.c_mu);
    CHECK(admissibility_G(p, g, tau) == doctest::Approx(direct).epsilon(1e-12));
  }
  // far past the underflow point the log form just reports zero
  CHECK(admissibility_G(p, g, 40.0) == 0.0);
}

TEST_CASE("admissibility kernel decreases past the F threshold") {
  const Geometry g(1.0, 5.0);
  const CertificationParams p = reference_params(g, 2, 5.0, 3.0);
  const double thresh =
      (3.0 * g.a_U + std::sqrt(9.0 * g.a_U * g.a_U + 8.0 * g.T * p.mu)) / (4.0 * g.T);
  double prev = log_admissibility_G(p, g, thresh);
  for (int i = 1; i <= 30; ++i) {
    const double tau = thresh + 0.1 * i;
    const double cur = log_admissibility_G(p, g, tau);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("sampling threshold") {
  const Geometry g(1.0, 5.0);
  const CertificationParams p = reference_params(g, 2, 5.0, 3.0);
  SUBCASE("reference values") {
    CHECK(sample_count_threshold(p, g, 3.0) == 2054266);
    CHECK(sample_count_threshold(p, g, 5.0) <= 10000000000LL);
  }
  SUBCASE("monotone in tau") {
    std::int64_t prev = 0;
    for (double tau : {1.0, 2.0, 3.0, 4.0, 5.0}) {
      const std::int64_t n = sample_count_threshold(p, g, tau);
      CHECK(n > prev);
      prev = n;
    }
  }
  SUBCASE("overflow carries the log value") {
    try {
      sample_count_threshold(p, g, 40.0);
      FAIL("expected MagnitudeError");
    } catch (const MagnitudeError& e) {
      CHECK(e.log_value ==
            doctest::Approx(log_sample_count_threshold(p, g, 40.0)).epsilon(1e-12));
    }
  }
}

TEST_CASE("certified frequency ceiling") {
  const Geometry g(1.0, 5.0);
  const CertificationParams p = reference_params(g, 2, 5.0, 3.0);
  SUBCASE("the 1e10 budget certifies past tau = 5") {
    const double tau_hi = max_certified_frequency(p, g, 10000000000LL);
    CHECK(tau_hi >= 5.0);
    CHECK(tau_hi < 6.0);
    CHECK(sample_count_threshold(p, g, tau_hi) <= 10000000000LL);
  }
  SUBCASE("budget equal to the tau0 threshold pins the ceiling at tau0") {
    const std::int64_t n0 = sample_count_threshold(p, g, 3.0);
    CHECK(max_certified_frequency(p, g, n0) == doctest::Approx(3.0).epsilon(1e-5));
    CHECK_THROWS_AS(max_certified_frequency(p, g, n0 - 1), InfeasibleError);
  }
  SUBCASE("nondecreasing in the sample budget") {
    double prev = 0.0;
    for (std::int64_t n : {3000000LL, 30000000LL, 300000000LL}) {
      const double tau_hi = max_certified_frequency(p, g, n);
      CHECK(tau_hi >= prev);
      prev = tau_hi;
    }
  }
}

TEST_CASE("certified error bounds") {
  const Geometry g(1.0, 5.0);
  const CertificationParams p = reference_params(g, 2, 5.0, 3.0);
  const CertifiedBounds b = certified_error_bounds(p, g, 3.0);
  SUBCASE("combined bound lands in the reference window") {
    CHECK(b.combined <= 0.017);
    CHECK(b.combined >= 0.016);
  }
  SUBCASE("continuous bound is the gap plus a negligible model term") {
    CHECK(b.continuous == doctest::Approx(4.1364e-4).epsilon(1e-3));
  }
  SUBCASE("combined dominates both pieces on the certified range") {
    for (double tau : {3.0, 4.0, 5.0}) {
      const CertifiedBounds bt = certified_error_bounds(p, g, tau);
      CHECK(bt.combined >= bt.continuous);
      CHECK(bt.combined >= bt.sampling * 0.999);
    }
  }
}

TEST_CASE("combined bound dominates the measured full-pipeline error") {
  // certified (tau, N_t) pairs with N_t at the sampling threshold; larger tau
  // need sample counts past any test budget, so the certified pairs checked
  // here stop at tau = 3.5 (threshold ~1.7e7)
  const Geometry g(1.0, 5.0);
  const CertificationParams p = reference_params(g, 2, 5.0, 3.0);
  const SeriesTruncation trunc{1000};
  for (double tau : {3.0, 3.5}) {
    const std::int64_t n_t = sample_count_threshold(p, g, tau);
    FrequencyGrid single{tau, 1.0, tau};
    const auto pts =
        discrete_frequency_sweep(g, Monomial{2}, trunc, n_t, single,
                                 /*stream=*/true, /*flux_on_grid=*/false);
    REQUIRE(pts.size() == 1);
    REQUIRE(pts[0].a_nt.has_value());
    CHECK(std::abs(*pts[0].a_nt - g.a) <=
          certified_error_bounds(p, g, tau).combined);
  }
}

TEST_CASE("frequency grid") {
  const FrequencyGrid grid{};
  CHECK(grid.size() == 29);
  CHECK(grid.at(0) == 1.0);
  CHECK(grid.at(28) == 15.0);
  FrequencyGrid bad{0.0, 0.5, 15.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("region extraction from synthetic sweeps") {
  const auto mk = [](double tau, double a_est) {
    SweepPoint p{};
    p.tau = tau;
    p.a_nt = a_est;
    return p;
  };
  SUBCASE("ties resolve to the smaller lower endpoint") {
    std::vector<SweepPoint> pts{mk(1.0, 1.0),  mk(1.5, 1.0), mk(2.0, 9.0),
                                mk(2.5, 1.0),  mk(3.0, 1.0), mk(3.5, 9.0)};
    const TrustedRegion r = region_from_sweep(pts, 1.0, 0.01, 0.5);
    CHECK(!r.is_empty);
    CHECK(r.tau_lo == 1.0);
    CHECK(r.tau_hi == 1.5);
  }
  SUBCASE("undefined estimates break runs") {
    std::vector<SweepPoint> pts{mk(1.0, 1.0), mk(1.5, 1.0)};
    SweepPoint na{};
    na.tau = 1.25;
    pts.insert(pts.begin() + 1, na);
    const TrustedRegion r = region_from_sweep(pts, 1.0, 0.01, 0.25);
    CHECK(r.tau_lo == r.tau_hi);
  }
  SUBCASE("no qualifying point yields the empty region") {
    std::vector<SweepPoint> pts{mk(1.0, 2.0), mk(1.5, 0.0)};
    const TrustedRegion r = region_from_sweep(pts, 1.0, 0.01, 0.5);
    CHECK(r.is_empty);
  }
}

TEST_CASE("empirical regions on the cheap reference rows") {
  const Geometry g(1.0, 5.0);
  const SeriesTruncation trunc{1000};
  const FrequencyGrid grid{};
  SUBCASE("f = t^2, N_t = 10^3, bound 0.01") {
    const TrustedRegion r = empirical_region(g, Monomial{2}, trunc, 1000, 0.01, grid);
    CHECK(!r.is_empty);
    CHECK(r.tau_lo == doctest::Approx(2.0));
    CHECK(r.tau_hi == doctest::Approx(5.0));
  }
  SUBCASE("rod length 4 shrinks the window to a single grid point") {
    const TrustedRegion r = empirical_region(Geometry(4.0, 5.0), Monomial{2}, trunc,
                                             10000, 0.01, grid);
    CHECK(!r.is_empty);
    CHECK(r.tau_lo == doctest::Approx(2.5));
    CHECK(r.tau_hi == doctest::Approx(2.5));
  }
  SUBCASE("streamed and buffered sweeps agree bit for bit") {
    const auto buffered =
        discrete_frequency_sweep(g, Monomial{2}, trunc, 500, grid, false);
    const auto streamed =
        discrete_frequency_sweep(g, Monomial{2}, trunc, 500, grid, true);
    REQUIRE(buffered.size() == streamed.size());
    for (std::size_t i = 0; i < buffered.size(); ++i) {
      CHECK(buffered[i].q == streamed[i].q);
      CHECK(buffered[i].i_nt == streamed[i].i_nt);
      CHECK(buffered[i].f_hat == streamed[i].f_hat);
    }
  }
  SUBCASE("larger sample counts keep containing the smaller region") {
    const TrustedRegion small = empirical_region(g, Monomial{2}, trunc, 1000, 0.01, grid);
    const TrustedRegion big = empirical_region(g, Monomial{2}, trunc, 10000, 0.01, grid);
    REQUIRE(!small.is_empty);
    REQUIRE(!big.is_empty);
    CHECK(big.tau_lo <= small.tau_lo);
    CHECK(big.tau_hi >= small.tau_hi);
  }
}
