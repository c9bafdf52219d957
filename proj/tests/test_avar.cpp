#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "covhf/avar.hpp"

using namespace covhf;

namespace {

KernelConstants exact_constants() {
  KernelConstants k;
  k.kappa = 7585.0 / 1161216.0;
  k.kappa_tilde = 1.0 / 24.0;
  k.kappa_bar = 151.0 / 20160.0;
  k.psi_hy = 0.25;
  return k;
}

AvarInputs unit_inputs() {
  AvarInputs in;
  in.ic_x = 1.0;
  in.ic_y = 1.0;
  in.ic_xy = 0.5;
  in.psi11 = in.psi22 = 2.5e-5;
  in.G = 1.5;
  in.theta = 1.0;
  in.constants = exact_constants();
  return in;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

// Golden values below come from an exact rational evaluation of the formulas.

TEST_CASE("w_squared: golden values") {
  AvarInputs in = unit_inputs();
  CHECK(w_squared_exo(in) == doctest::Approx(3.135429872169312).epsilon(1e-13));
  CHECK(w_squared_endo(in) == doctest::Approx(3.135429872169312).epsilon(1e-13));

  in.z_x = in.z_y = 0.09;
  in.z_xy = 0.045;
  in.z_xY = in.z_Xy = 0.15;
  CHECK(w_squared_endo(in) == doctest::Approx(3.6388904435978837).epsilon(1e-13));
  CHECK_THROWS_AS(w_squared_exo(in), std::invalid_argument);

  AvarInputs asym;
  asym.ic_x = 1.0;
  asym.ic_y = 4.0;
  asym.ic_xy = 0.5;
  asym.psi11 = 0.01;
  asym.psi22 = 0.02;
  asym.psi12 = 0.005;
  asym.chi = 0.5;
  asym.z_x = 0.1;
  asym.z_y = 0.2;
  asym.z_xy = 0.05;
  asym.z_xY = 0.25;
  asym.z_Xy = 0.125;
  asym.G = 1.4;
  asym.F1 = 1.5;
  asym.F2 = 0.5;
  asym.F12 = 1.2;
  asym.theta = 0.8;
  asym.constants = exact_constants();
  CHECK(w_squared_endo(asym) == doctest::Approx(10.107610524533888).epsilon(1e-13));

  AvarInputs clean = unit_inputs();
  clean.psi11 = clean.psi22 = 0.0;
  clean.ic_xy = 0.0;
  CHECK(w_squared_exo(clean) == doctest::Approx(2.508267195767196).epsilon(1e-13));
}

TEST_CASE("w_squared with computed kernel constants") {
  AvarInputs in = unit_inputs();
  in.constants = kernel_constants(WeightScheme::triangular());
  CHECK(w_squared_exo(in) == doctest::Approx(3.135429872169312).epsilon(1e-6));
}

TEST_CASE("endogenous formula reduces to the exogenous one bit for bit") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.05, 3.0);
  std::uniform_real_distribution<double> c(-0.95, 0.95);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const KernelConstants k = kernel_constants(WeightScheme::triangular());
  for (int trial = 0; trial < 100; ++trial) {
    AvarInputs in;
    in.ic_x = u(rng);
    in.ic_y = u(rng);
    in.ic_xy = c(rng) * std::sqrt(in.ic_x * in.ic_y);
    in.psi11 = 0.01 * u(rng);
    in.psi22 = 0.01 * u(rng);
    in.psi12 = 0.01 * c(rng);
    in.chi = unit(rng);
    in.G = u(rng);
    in.F1 = u(rng);
    in.F2 = u(rng);
    in.F12 = u(rng);
    in.theta = u(rng);
    in.constants = k;
    CAPTURE(trial);
    CHECK(same_bits(w_squared_endo(in), w_squared_exo(in)));
  }
}

TEST_CASE("derivative of w_squared in G") {
  // w^2 = A G + B / G + C
  AvarInputs in = unit_inputs();
  in.psi11 = in.psi22 = 0.01;
  auto at = [&](double g) {
    AvarInputs x = in;
    x.G = g;
    return w_squared_exo(x);
  };
  const double h2 = 0.25 * 0.25;
  const double a = exact_constants().kappa * 1.25 / (h2 * h2);
  const double b = exact_constants().kappa_tilde * 1e-4 / (h2 * h2);
  for (double g : {0.5, 1.0, 2.0, 3.3}) {
    const double dg = 1e-5;
    const double deriv = (at(g + dg) - at(g - dg)) / (2 * dg);
    CHECK(deriv == doctest::Approx(a - b / (g * g)).epsilon(1e-6));
  }
}

TEST_CASE("w_squared input validation") {
  AvarInputs in = unit_inputs();
  in.G = 0.0;
  CHECK_THROWS_AS(w_squared_exo(in), std::invalid_argument);
  in = unit_inputs();
  in.ic_xy = 2.0;
  CHECK_THROWS_AS(w_squared_endo(in), std::invalid_argument);
  in = unit_inputs();
  in.chi = 1.5;
  CHECK_THROWS_AS(w_squared_exo(in), std::invalid_argument);
  in = unit_inputs();
  in.theta = 0.0;
  CHECK_THROWS_AS(w_squared_exo(in), std::invalid_argument);
  in = unit_inputs();
  in.z_xY = 50.0;  // correction term dominates
  CHECK_THROWS_AS(w_squared_endo(in), std::domain_error);
}

TEST_CASE("G and F for Poisson sampling") {
  const auto unit = gf_poisson_changepoint(1, 1, 1, 1, 2, 2, 0.5);
  CHECK(unit.G == 1.5);
  CHECK(unit.F1 == 1.0);
  CHECK(unit.F2 == 1.0);
  CHECK(unit.F12 == 1.0);
  CHECK(unit.chi == 0.0);

  const auto uneven = gf_poisson_changepoint(1, 1, 3, 3, 2, 2, 0.5);
  CHECK(uneven.G == doctest::Approx(1.0 + 1.0 / 3.0 - 0.25));
  CHECK(uneven.F12 == 0.5);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> p(0.1, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double a = p(rng);
    const double b = p(rng);
    const auto gf = gf_poisson_changepoint(a, a, b, b, 1, 1, 0.0);
    CHECK(gf.G < gf.F1 + gf.F2);
    CHECK(gf.G > std::max(gf.F1, gf.F2));
  }
  CHECK_THROWS_AS(gf_poisson_changepoint(0, 1, 1, 1, 0, 0, 0), std::invalid_argument);
}

TEST_CASE("G and F switch regime at the change point") {
  const double tau = 0.4;
  const auto before = gf_poisson_changepoint(1, 4, 2, 2, tau, 1.0, std::nextafter(tau, 0.0));
  const auto at = gf_poisson_changepoint(1, 4, 2, 2, tau, 1.0, tau);
  const auto after = gf_poisson_changepoint(1, 4, 2, 2, tau, 1.0, 0.7);
  CHECK(before.F1 == 1.0);
  CHECK(at.F1 == 0.25);
  CHECK(at.G == after.G);
  CHECK(at.G == doctest::Approx(0.25 + 0.5 - 1.0 / 6.0));
}

TEST_CASE("integrated variance") {
  const AvarInputs base = unit_inputs();
  const double w = w_squared_exo(base);
  const std::vector<AvarSegment> one{{0.0, 1.0, base}};
  CHECK(integrated_variance(one, 1.0, false) == doctest::Approx(w));
  CHECK(integrated_variance(one, 0.25, false) == doctest::Approx(0.25 * w));
  CHECK(integrated_variance(one, 0.0, false) == 0.0);

  const std::vector<AvarSegment> split{{0.0, 0.3, base}, {0.3, 1.0, base}};
  CHECK(integrated_variance(split, 1.0, false) == doctest::Approx(w));

  const std::vector<AvarSegment> gap{{0.0, 0.3, base}, {0.4, 1.0, base}};
  CHECK_THROWS_AS(integrated_variance(gap, 1.0, false), std::invalid_argument);
  const std::vector<AvarSegment> overlap{{0.0, 0.5, base}, {0.4, 1.0, base}};
  CHECK_THROWS_AS(integrated_variance(overlap, 1.0, false), std::invalid_argument);
  CHECK_THROWS_AS(integrated_variance(one, 2.0, false), std::invalid_argument);
  const std::vector<AvarSegment> late{{0.1, 1.0, base}};
  CHECK_THROWS_AS(integrated_variance(late, 1.0, false), std::invalid_argument);
}

TEST_CASE("integrated variance over change points matches a midpoint quadrature") {
  AvarInputs base = unit_inputs();
  base.z_x = base.z_y = 0.09;
  base.z_xy = 0.045;
  base.z_xY = base.z_Xy = 0.15;
  const double t = 1.0;
  const auto segs = poisson_changepoint_segments(base, 1.0, 2.0, 1.5, 0.5, 0.3, 0.65, t);
  REQUIRE(segs.size() == 3);
  CHECK(segs[1].start == 0.3);
  CHECK(segs[2].start == 0.65);
  const double v = integrated_variance(segs, t, true);

  const int m = 100000;
  double q = 0.0;
  for (int k = 0; k < m; ++k) {
    const double s = (k + 0.5) / m;
    AvarInputs in = base;
    apply(in, gf_poisson_changepoint(1.0, 2.0, 1.5, 0.5, 0.3, 0.65, s));
    q += w_squared_endo(in) / m;
  }
  CHECK(v == doctest::Approx(q).epsilon(1e-4));

  const auto none = poisson_changepoint_segments(base, 1.0, 2.0, 1.0, 2.0, 5.0, 5.0, t);
  CHECK(none.size() == 1);
}

TEST_CASE("oracle confidence interval") {
  const Interval ci = oracle_ci(0.5, 1.6e-3, 1.0, 0.95);  // b_n^{1/4} sqrt(V) = 0.04
  CHECK((ci.hi - ci.lo) / 2 == doctest::Approx(1.959963984540054 * 0.04).epsilon(1e-12));
  CHECK(ci.contains(0.5));
  CHECK((ci.lo + ci.hi) / 2 == doctest::Approx(0.5));

  const Interval scaled = oracle_ci(0.0, 1.0, 1.0 / 16.0, 0.95);
  CHECK(scaled.hi == doctest::Approx(1.959963984540054 * 0.5).epsilon(1e-12));

  const Interval wide = oracle_ci(1.0, 0.3, 1e-3, 0.99);
  const Interval narrow = oracle_ci(1.0, 0.3, 1e-3, 0.8);
  CHECK(wide.lo < narrow.lo);
  CHECK(wide.hi > narrow.hi);
  CHECK_THROWS_AS(oracle_ci(0.0, -1.0, 1.0, 0.95), std::invalid_argument);
  CHECK_THROWS_AS(oracle_ci(0.0, 1.0, 0.0, 0.95), std::invalid_argument);
  CHECK_THROWS_AS(oracle_ci(0.0, 1.0, 1.0, 1.0), std::invalid_argument);
}
