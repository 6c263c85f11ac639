#include <doctest.h>

#include <cmath>
#include <vector>

#include "pqmc/errors.hpp"
#include "pqmc/oracle.hpp"
#include "pqmc/rng.hpp"

using namespace pqmc;

TEST_SUITE("oracle") {
  TEST_CASE("quadrature of simple moments") {
    for (std::size_t d : {1u, 2u}) {
      const auto g = DistributionSpec::standard_normal(d);
      CHECK(quad_expectation([](std::span<const double>) { return 1.0; }, g) ==
            doctest::Approx(1.0).epsilon(1e-12));
      CHECK(quad_expectation(
                [](std::span<const double> x) {
                  double s = 0.0;
                  for (double v : x) s += v * v;
                  return s;
                },
                g) == doctest::Approx(static_cast<double>(d)).epsilon(1e-10));
    }
    // E X^2 = nu / (nu - 2) and E X^4 = 3 nu^2 / ((nu - 2)(nu - 4)) for Student-t.
    const auto t = DistributionSpec::student_t(1, 7.0);
    CHECK(quad_expectation([](std::span<const double> x) { return x[0] * x[0]; }, t) ==
          doctest::Approx(7.0 / 5.0).epsilon(1e-9));
    CHECK(quad_expectation([](std::span<const double> x) { return std::pow(x[0], 4); }, t) ==
          doctest::Approx(3.0 * 49.0 / 15.0).epsilon(1e-8));
  }

  TEST_CASE("paper test function integrates to one") {
    const QuadResult r =
        quad_expectation_detail(make_paper_test_function(0.2, 2).eval,
                                DistributionSpec::standard_normal(2));
    CHECK(std::fabs(r.value - 1.0) <= 1e-8);
    CHECK(r.error <= 1e-9);
  }

  TEST_CASE("doubling the nodes moves the value by less than the tolerance") {
    const auto f = make_paper_test_function(0.3, 1).eval;
    const auto g = DistributionSpec::standard_normal(1);
    QuadratureSpec q;
    const double a = quad_expectation(f, g, q);
    q.nodes *= 2;
    const double b = quad_expectation(f, g, q);
    CHECK(std::fabs(a - b) <= 1e-9);
  }

  TEST_CASE("quadrature errors") {
    const auto f = [](std::span<const double>) { return 1.0; };
    CHECK_THROWS_AS(quad_expectation(f, DistributionSpec::standard_normal(3)),
                    UnsupportedDimension);
    QuadratureSpec q;
    q.nodes = 10;
    CHECK_THROWS_AS(q.validate(), ConfigError);
    q = QuadratureSpec{};
    q.truncation = 4.0;
    CHECK_THROWS_AS(q.validate(), ConfigError);
    // M = 0.499 leaves mass far beyond any truncation the gate will accept.
    CHECK_THROWS_AS(quad_expectation(make_paper_test_function(0.499, 1).eval,
                                     DistributionSpec::standard_normal(1)),
                    AccuracyError);
  }

  TEST_CASE("mixed partials by finite differences") {
    const Evaluator f = [](std::span<const double> x) {
      return x[0] * x[0] * x[1] + std::sin(x[1]);
    };
    const std::vector<double> x{0.7, -0.4};
    const std::size_t u0[1] = {0};
    const std::size_t u1[1] = {1};
    const std::size_t u01[2] = {0, 1};
    CHECK(mixed_partial_fd(f, x, u0) == doctest::Approx(2 * 0.7 * -0.4).epsilon(1e-8));
    CHECK(mixed_partial_fd(f, x, u1) == doctest::Approx(0.49 + std::cos(-0.4)).epsilon(1e-8));
    CHECK(mixed_partial_fd(f, x, u01) == doctest::Approx(1.4).epsilon(1e-7));
  }

  TEST_CASE("Hardy-Krause variation on the cube") {
    CHECK(hk_variation_cube([](std::span<const double> y) { return y[0]; }, 1).value ==
          doctest::Approx(1.0).epsilon(1e-8));
    // y1 y2: two one-dimensional terms of 1 each plus the mixed term 1.
    CHECK(hk_variation_cube([](std::span<const double> y) { return y[0] * y[1]; }, 2).value ==
          doctest::Approx(3.0).epsilon(1e-8));
    // sin(3y) rises to 1 at y = pi/6 and falls to sin 3: variation 2 - sin 3.
    CHECK(hk_variation_cube([](std::span<const double> y) { return std::sin(3.0 * y[0]); }, 1)
              .value == doctest::Approx(2.0 - std::sin(3.0)).epsilon(1e-7));
    // Depends on y1 only: the y2 and mixed terms vanish.
    CHECK(hk_variation_cube([](std::span<const double> y) { return std::sin(3.0 * y[0]); }, 2)
              .value == doctest::Approx(2.0 - std::sin(3.0)).epsilon(1e-7));
    CHECK_THROWS_AS(hk_variation_cube([](std::span<const double>) { return 0.0; }, 3),
                    UnsupportedDimension);
  }

  TEST_CASE("transported variation of a linear function") {
    // f = x1 + x2 projected: each axis contributes the range of P_R.
    const ProjectionConfig cfg(4.0);
    const double span = 2.0 * (cfg.R - 0.5 * cfg.eps);
    const auto lin = make_linear(2);
    CHECK(hk_variation_transported(lin.eval, 2, cfg).value ==
          doctest::Approx(2.0 * span).epsilon(1e-7));
  }

  TEST_CASE("projection error is monotone in the radius and zero for constants") {
    const TestIntegrand h = make_exp_linear(0.5, 1);
    double prev = INFINITY;
    for (double R : {3.0, 4.0, 5.0, 6.0}) {
      const BoundReport r = projection_error_sq(h, ProjectionConfig(R));
      CHECK(r.lhs < prev);
      CHECK(r.pass);
      prev = r.lhs;
    }
    CHECK(projection_error_sq(make_constant(2.0, 2), ProjectionConfig(4.0)).lhs == 0.0);
    CHECK_THROWS_AS(projection_error_sq(h, ProjectionConfig(4.0, 0.5)), DomainError);
  }

  TEST_CASE("class bounds hold for the polynomial examples") {
    for (double R = 3.0; R <= 6.0; R += 1.0) {
      for (std::size_t d : {1u, 2u}) {
        for (const TestIntegrand& h : {make_linear(d), make_quadratic(d)}) {
          CAPTURE(h.name);
          CAPTURE(R);
          CHECK(projection_error_sq(h, ProjectionConfig(R)).pass);
          CHECK(hk_variation_bound(h, ProjectionConfig(R)).pass);
        }
      }
    }
  }

  TEST_CASE("exponential-class variation bound for the test function") {
    const BoundReport r =
        hk_variation_bound(make_paper_test_function(0.2, 1), ProjectionConfig(5.0));
    CHECK(r.pass);
    CHECK(r.lhs > 0.0);
    CHECK(r.lemma == "hk-exp");
  }

  TEST_CASE("importance-sampling bounds") {
    const auto t = DistributionSpec::student_t(1, 3.0);
    const TestIntegrand h = make_paper_test_function(0.2, 1);
    const GrowthClass ratio = certify_is_ratio(0.2, h.growth->B, t);
    CHECK(ratio.kind == GrowthKind::exponential);
    CHECK(ratio.M == doctest::Approx(0.201));
    CHECK(is_projection_error_sq(h, t, ProjectionConfig(6.0), ratio).pass);
    CHECK(is_hk_variation_bound(h, t, ProjectionConfig(5.0), ratio).pass);
    CHECK(is_derivative_bound(h, t, ratio).pass);
    CHECK_THROWS_AS(certify_is_ratio(0.2, 1.0, DistributionSpec::standard_normal(1)),
                    DomainError);
    CHECK_THROWS_AS(is_projection_error_sq(h, t, ProjectionConfig(2.0), ratio), DomainError);
    // d = 1: max(1, sup_r 2 r e^{-0.3 r^2}) with the sup at r = 1 / sqrt(0.6).
    CHECK(is_derivative_constant(0.2, 1.0, 1) ==
          doctest::Approx(2.0 * std::exp(-0.5) / std::sqrt(0.6)).epsilon(1e-6));
    CHECK_THROWS_AS(projection_error_sq(make_paper_test_function(0.2, 1), ProjectionConfig(4.0)),
                    DomainError);
  }

  TEST_CASE("lemma suite passes") {
    const auto reports = run_lemma_suite();
    CHECK(reports.size() > 20);
    for (const auto& r : reports) {
      CAPTURE(r.lemma);
      CAPTURE(r.integrand);
      CAPTURE(r.R);
      CHECK(r.pass);
      CHECK(r.lhs <= r.rhs);
    }
  }

  TEST_CASE("slope fit") {
    std::vector<double> x;
    std::vector<double> y;
    for (int m = 7; m <= 16; ++m) {
      x.push_back(m);
      y.push_back(-1.5 * m + 2.0);
    }
    const SlopeFit f = slope_fit(x, y);
    CHECK(f.slope == doctest::Approx(-1.5).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(f.residual_rms < 1e-12);
    CHECK(f.points == 10);
    CHECK(slope_fit(x, y, 3, 6).points == 4);
    CHECK_THROWS_AS(slope_fit(x, y, 3, 5), DomainError);

    // n^-1 log n has a local slope between -1 and -0.6 on m = 10..16.
    std::vector<double> ly;
    for (double m : x) ly.push_back(std::log2(std::pow(2.0, -m) * m * std::log(2.0)));
    const SlopeFit g = slope_fit(x, ly, 3);
    CHECK(g.slope > -1.0);
    CHECK(g.slope < -0.6);
  }

  TEST_CASE("KS p-value") {
    CounterRng rng(42);
    std::vector<double> u(2000);
    for (double& v : u) v = rng.uniform_open();
    CHECK(ks_uniform_pvalue(u) > 0.01);
    for (double& v : u) v = v * v;
    CHECK(ks_uniform_pvalue(u) < 1e-6);
  }
}
