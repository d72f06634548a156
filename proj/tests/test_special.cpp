#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "confsets/special.hpp"

using namespace confsets;

// Reference values below were produced by an independent implementation
// (series/continued-fraction-free: erf recurrence for central chi-square,
// explicit Poisson mixture summed to 1e-18 for the noncentral case,
// bisection for quantiles) and are frozen here to full printed precision.

TEST_CASE("central chi-square cdf") {
  CHECK(chi_square_cdf(1.0, 1.0) == doctest::Approx(0.682689492137086).epsilon(1e-13));
  CHECK(chi_square_cdf(2.5, 2.0) == doctest::Approx(0.7134952031398099).epsilon(1e-13));
  CHECK(chi_square_cdf(7.0, 4.0) == doctest::Approx(0.8641117745995668).epsilon(1e-13));
  CHECK(chi_square_cdf(30.0, 5.0) == doctest::Approx(0.9999852514189617).epsilon(1e-13));
  CHECK(chi_square_cdf(0.0, 3.0) == 0.0);
  // dof = 2 is exponential(1/2): closed form 1 - exp(-x/2)
  CHECK(chi_square_cdf(3.0, 2.0) == doctest::Approx(1.0 - std::exp(-1.5)).epsilon(1e-14));
}

TEST_CASE("chi-square quantiles") {
  CHECK(chi_square_quantile(0.95, 1.0) == doctest::Approx(3.8414588206941227).epsilon(1e-12));
  CHECK(chi_square_quantile(0.95, 2.0) == doctest::Approx(5.991464547107977).epsilon(1e-12));
  CHECK(chi_square_quantile(0.95, 3.0) == doctest::Approx(7.814727903251173).epsilon(1e-12));
  CHECK(chi_square_quantile(0.99, 2.0) == doctest::Approx(9.21034037197617).epsilon(1e-12));
  CHECK(chi_square_quantile(0.50, 4.0) == doctest::Approx(3.356693980033321).epsilon(1e-12));
  CHECK_THROWS_AS(chi_square_quantile(0.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(chi_square_quantile(1.0, 2.0), std::invalid_argument);
}

TEST_CASE("cdf and quantile are inverse") {
  const double probs[] = {0.01, 0.1, 0.5, 0.9, 0.95, 0.999};
  const double dofs[] = {1.0, 2.0, 3.0, 7.0, 15.0};
  for (double dof : dofs)
    for (double prob : probs) {
      const double q = chi_square_quantile(prob, dof);
      CHECK(chi_square_cdf(q, dof) == doctest::Approx(prob).epsilon(1e-10));
    }
}

TEST_CASE("noncentral chi-square cdf") {
  // zero noncentrality collapses to the central law
  CHECK(noncentral_chi_square_cdf(2.5, 2.0, 0.0) ==
        doctest::Approx(chi_square_cdf(2.5, 2.0)).epsilon(1e-13));
  CHECK(noncentral_chi_square_cdf(8.642203874181078, 2.0, 1.0) ==
        doctest::Approx(0.9500000000774544).epsilon(1e-11));
  CHECK(noncentral_chi_square_cdf(5.991464547107979, 2.0, 1.0) ==
        doctest::Approx(0.8672899857674833).epsilon(1e-11));
  CHECK(noncentral_chi_square_cdf(8.642203874181078, 2.0, 1.0 / 3.0) ==
        doctest::Approx(0.9762317686646123).epsilon(1e-11));
  CHECK(noncentral_chi_square_cdf(10.0, 3.0, 5.0) ==
        doctest::Approx(0.7066486477774518).epsilon(1e-11));
  CHECK(noncentral_chi_square_cdf(2.0, 1.0, 0.3) ==
        doctest::Approx(0.7820045604937391).epsilon(1e-11));
  CHECK(noncentral_chi_square_cdf(30.0, 5.0, 12.0) ==
        doctest::Approx(0.9400305984560515).epsilon(1e-11));
  // deep lower tail with a large shift
  CHECK(noncentral_chi_square_cdf(1.0, 4.0, 20.0) ==
        doctest::Approx(1.6215895933753642e-05).epsilon(1e-8));
  CHECK(noncentral_chi_square_cdf(0.0, 2.0, 1.0) == 0.0);
}

TEST_CASE("noncentral cdf is monotone in each argument") {
  // increasing in x, decreasing in noncentrality
  double prev = 0.0;
  for (double x = 0.5; x <= 20.0; x += 0.5) {
    const double v = noncentral_chi_square_cdf(x, 3.0, 2.0);
    CHECK(v >= prev);
    prev = v;
  }
  prev = 1.0;
  for (double nc = 0.0; nc <= 10.0; nc += 0.25) {
    const double v = noncentral_chi_square_cdf(6.0, 3.0, nc);
    CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("normal cdf and quantile") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(normal_cdf(1.5) == doctest::Approx(0.9331927987311419).epsilon(1e-13));
  CHECK(normal_cdf(-1.5) == doctest::Approx(1.0 - 0.9331927987311419).epsilon(1e-13));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.9599639845400536).epsilon(1e-13));
  CHECK(normal_quantile(0.99) == doctest::Approx(2.3263478740408408).epsilon(1e-13));
  CHECK(normal_quantile(1e-8) == doctest::Approx(-5.61200124417479).epsilon(1e-12));
  for (double p = 0.02; p < 1.0; p += 0.02)
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-13));
}

TEST_CASE("regularized incomplete gamma basics") {
  // P(1, x) = 1 - exp(-x)
  CHECK(regularized_gamma_p(1.0, 2.0) == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-14));
  CHECK(regularized_gamma_p(3.0, 0.0) == 0.0);
  CHECK(regularized_gamma_p(0.5, 50.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("halton radical inverse, base 2 and 3") {
  CHECK(halton(0, 2) == 0.0);
  CHECK(halton(1, 2) == 0.5);
  CHECK(halton(2, 2) == 0.25);
  CHECK(halton(3, 2) == 0.75);
  CHECK(halton(4, 2) == 0.125);
  CHECK(halton(1, 3) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(halton(2, 3) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(halton(3, 3) == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
  for (std::uint64_t i = 0; i < 100; ++i) {
    CHECK(halton(i, 2) >= 0.0);
    CHECK(halton(i, 2) < 1.0);
  }
}
