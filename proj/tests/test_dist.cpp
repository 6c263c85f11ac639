#include <doctest.h>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <numbers>
#include <vector>

#include "pqmc/dist.hpp"
#include "pqmc/errors.hpp"
#include "pqmc/oracle.hpp"

using namespace pqmc;

namespace {

// Probabilities from 1e-300 to 0.5, log-spaced, plus their mirror images.
std::vector<double> probability_grid() {
  std::vector<double> p;
  for (double e = -300.0; e < std::log10(0.5); e += 0.25) p.push_back(std::pow(10.0, e));
  for (double u = 0.01; u < 0.995; u += 0.01) p.push_back(u);
  const std::size_t n = p.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (p[i] > 1e-16 && p[i] < 0.5) p.push_back(1.0 - p[i]);
  }
  return p;
}

double rel_or_abs(double a, double b) {
  return std::fabs(a - b) / std::max(1.0, std::fabs(b));
}

const std::vector<double> kNus{1.0, 2.0, 3.0, 4.0, 4.5, 5.0, 7.0, 10.0, 30.0, 64.0, 65.0, 200.0};

}  // namespace

TEST_SUITE("dist") {
  TEST_CASE("normal quantile examples") {
    CHECK(phi_inv(0.5) == 0.0);
    CHECK(std::fabs(phi_inv(0.975) - 1.959964) < 1e-6);
    // Dyadic p keeps 1 - p exact.
    for (double p : {0x1p-50, 0x1p-17, 0x1p-7, 0.125, 0.25, 0.375}) {
      CHECK(phi_inv(1.0 - p) == doctest::Approx(-phi_inv(p)).epsilon(1e-9));
    }
    CHECK(phi_inv(0.0) == -INFINITY);
    CHECK(phi_inv(1.0) == INFINITY);
    CHECK_THROWS_AS(phi_inv(1.5), DomainError);
    CHECK_THROWS_AS(phi_inv(NAN), DomainError);
  }

  TEST_CASE("normal quantile agrees with Boost across the grid") {
    const boost::math::normal_distribution<double> N;
    double worst = 0.0;
    for (double p : probability_grid()) {
      worst = std::max(worst, rel_or_abs(phi_inv(p), boost::math::quantile(N, p)));
    }
    CHECK(worst < 1e-13);
  }

  TEST_CASE("normal density and CDF") {
    CHECK(std::fabs(normal_pdf(0.0) - 0.39894228) < 1e-8);
    const boost::math::normal_distribution<double> N;
    for (double x = -30.0; x <= 30.0; x += 0.37) {
      CHECK(normal_pdf(x) == normal_pdf(-x));
      CHECK(normal_pdf(x) == doctest::Approx(boost::math::pdf(N, x)).epsilon(1e-13));
      CHECK(normal_cdf(x) == doctest::Approx(boost::math::cdf(N, x)).epsilon(1e-12));
    }
    QuadratureSpec q;
    q.breakpoints = {-8.0, 8.0};
    const double mass = quad_expectation(
        [](std::span<const double> x) { return std::fabs(x[0]) <= 8.0 ? 1.0 : 0.0; },
        DistributionSpec::standard_normal(1), q);
    CHECK(std::fabs(mass - 1.0) <= 1e-12);
  }

  TEST_CASE("Student-t density") {
    CHECK(std::fabs(t_pdf(0.0, 3.0) - 2.0 / (std::numbers::pi * std::sqrt(3.0))) < 1e-12);
    CHECK(std::fabs(t_pdf(0.0, 3.0) - 0.3675526) < 1e-6);
    for (double nu : kNus) {
      const boost::math::students_t_distribution<double> T(nu);
      for (double x = -50.0; x <= 50.0; x += 0.73) {
        CHECK(t_pdf(x, nu) == t_pdf(-x, nu));
        CHECK(t_pdf(x, nu) == doctest::Approx(boost::math::pdf(T, x)).epsilon(1e-12));
        CHECK(t_cdf(x, nu) == doctest::Approx(boost::math::cdf(T, x)).epsilon(1e-11));
      }
    }
    QuadratureSpec q;
    q.breakpoints = {-1e4, 1e4};
    const double mass = quad_expectation(
        [](std::span<const double> x) { return std::fabs(x[0]) <= 1e4 ? 1.0 : 0.0; },
        DistributionSpec::student_t(1, 3.0), q);
    CHECK(std::fabs(mass - 1.0) <= 1e-6);
  }

  TEST_CASE("Student-t quantile examples") {
    CHECK(t_inv(0.5, 3.0) == 0.0);
    CHECK(std::fabs(t_inv(0.975, 3.0) - 3.182446) < 1e-5);
    CHECK(t_inv(0.0, 3.0) == -INFINITY);
    CHECK(t_inv(1.0, 3.0) == INFINITY);
    CHECK_THROWS_AS(t_inv(0.3, 0.5), DomainError);
  }

  TEST_CASE("Student-t quantile agrees with Boost across the grid") {
    for (double nu : kNus) {
      CAPTURE(nu);
      const boost::math::students_t_distribution<double> T(nu);
      double worst = 0.0;
      for (double p : probability_grid()) {
        const double ref = boost::math::quantile(T, p);
        if (!std::isfinite(ref)) continue;
        worst = std::max(worst, rel_or_abs(t_inv(p, nu), ref));
      }
      CHECK(worst < 1e-11);
    }
  }

  TEST_CASE("quantiles are strictly increasing on dense grids") {
    double prev_n = -INFINITY;
    std::vector<double> prev_t(kNus.size(), -INFINITY);
    for (int i = 1; i < 200000; ++i) {
      const double p = i / 200000.0;
      const double z = phi_inv(p);
      CHECK(z > prev_n);
      prev_n = z;
      if (i % 10 == 0) {
        for (std::size_t k = 0; k < kNus.size(); ++k) {
          const double t = t_inv(p, kNus[k]);
          CHECK(t > prev_t[k]);
          prev_t[k] = t;
        }
      }
    }
  }

  TEST_CASE("CDF(quantile(p)) round-trips to 1e-8") {
    for (double p : probability_grid()) {
      if (p < 1e-12 || p > 1.0 - 1e-12) continue;
      CHECK(std::fabs(normal_cdf(phi_inv(p)) - p) <= 1e-8);
      for (double nu : kNus) CHECK(std::fabs(t_cdf(t_inv(p, nu), nu) - p) <= 1e-8);
    }
  }

  TEST_CASE("large nu approaches the normal quantile") {
    for (double p = 0.01; p <= 0.99; p += 0.005) {
      CHECK(std::fabs(t_inv(p, 200.0) - phi_inv(p)) <= 0.02);
    }
  }

  TEST_CASE("regularized incomplete beta agrees with Boost") {
    for (double a : {0.5, 1.0, 1.5, 3.0, 10.0}) {
      for (double b : {0.5, 2.0, 7.5}) {
        for (double x = 0.0; x <= 1.0; x += 0.05) {
          CHECK(incomplete_beta(a, b, x) ==
                doctest::Approx(boost::math::ibeta(a, b, x)).epsilon(1e-12));
        }
      }
    }
  }

  TEST_CASE("componentwise inverse map") {
    const DistributionSpec n3 = DistributionSpec::standard_normal(3);
    const std::vector<double> half(3, 0.5);
    for (double v : n3.map_inverse(half)) CHECK(v == 0.0);
    const std::vector<double> edge{0.0, 0.5, 0.5};
    CHECK(n3.map_inverse(edge)[0] == -INFINITY);

    const DistributionSpec mixed({Marginal::normal(), Marginal::student_t(3.0)});
    const std::vector<double> y{0.975, 0.975};
    const auto x = mixed.map_inverse(y);
    CHECK(std::fabs(x[0] - 1.959964) < 1e-6);
    CHECK(std::fabs(x[1] - 3.182446) < 1e-5);
  }

  TEST_CASE("product density and moments") {
    const DistributionSpec g({Marginal::normal(), Marginal::student_t(3.0)});
    const std::vector<double> x{0.3, -1.2};
    CHECK(g.pdf(x) == doctest::Approx(normal_pdf(0.3) * t_pdf(-1.2, 3.0)).epsilon(1e-14));
    CHECK(g.second_moment() == doctest::Approx(1.0 + 3.0));
    CHECK(DistributionSpec::student_t(5, 3.0).second_moment() == doctest::Approx(15.0));
    CHECK(std::isinf(Marginal::student_t(2.0).second_moment()));
    CHECK(DistributionSpec::standard_normal(4).is_standard_normal());
    CHECK_FALSE(g.is_standard_normal());
    CHECK(std::isinf(DistributionSpec::standard_normal(2).min_nu()));
  }

  TEST_CASE("distribution parser") {
    CHECK(parse_distribution("normal", 2) == DistributionSpec::standard_normal(2));
    CHECK(parse_distribution("t:3", 4) == DistributionSpec::student_t(4, 3.0));
    CHECK(parse_distribution("t(4.5)", 1) == DistributionSpec::student_t(1, 4.5));
    CHECK_THROWS(parse_distribution("cauchy", 1));
    CHECK_THROWS(parse_distribution("t:", 1));
    CHECK_THROWS(parse_distribution("t:0.5", 1));
  }
}
