#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "pqmc/dist.hpp"
#include "pqmc/growth.hpp"
#include "pqmc/projection.hpp"

namespace pqmc {

// Brute-force reference computations for d <= 2. Nothing here calls the
// library's quantile functions, so the estimators can be checked against it.

struct QuadratureSpec {
  /// Gauss-Legendre nodes per axis (composite, panels of order 20).
  std::size_t nodes = 400;
  /// Initial truncation |x| <= T of normal axes; widened automatically
  /// while the truncated mass is still visible at the tolerance.
  double truncation = 10.0;
  /// Axis points where the integrand may have a kink (e.g. +-R, +-(R-eps)).
  std::vector<double> breakpoints;
  /// Absolute tolerance, scaled by max(1, |value|).
  double tolerance = 1e-8;

  /// ConfigError unless nodes >= 50 and truncation >= 8.
  void validate() const;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // max drift under node doubling / wider truncation
  std::size_t nodes = 0;
  double truncation = 0.0;
};

/// E[f(X)] for X ~ g by tensor quadrature. Student-t axes are mapped to
/// (-pi/2, pi/2) via x = sqrt(nu) tan(theta), normal axes are truncated.
/// UnsupportedDimension for d > 2; AccuracyError when the refinement gate
/// (node doubling, truncation + 2) does not meet the tolerance.
QuadResult quad_expectation_detail(const Evaluator& f, const DistributionSpec& g,
                                   const QuadratureSpec& q = {});
double quad_expectation(const Evaluator& f, const DistributionSpec& g,
                        const QuadratureSpec& q = {});

/// Mixed partial over the coordinates in u (|u| <= 3): tensor central
/// differences with steps h and h/2 combined by one Richardson step.
double mixed_partial_fd(const Evaluator& f, std::span<const double> x,
                        std::span<const std::size_t> u, double h = 1e-4);

struct HkResult {
  double value = 0.0;
  double error = 0.0;
};

/// Hardy-Krause variation of a smooth f on [0,1]^d (d <= 2) anchored at 1:
/// sum over nonempty u of the integral of |d^u f(y_u : 1)|. Partials by
/// boundary-shifted central differences (step 1e-4). AccuracyError when
/// the value moves by more than 1e-6 (relative) under node doubling.
HkResult hk_variation_cube(const Evaluator& f, std::size_t d,
                           std::size_t nodes = 200);

/// Variation of f o P_R o F^{-1} for any continuous product F, evaluated
/// exactly in x-space: sum_u of the integral over [-R,R]^u of
/// |d^u (f o P_R)(x_u : +inf)|. The result does not depend on F.
HkResult hk_variation_transported(const Evaluator& f, std::size_t d,
                                  const ProjectionConfig& cfg,
                                  std::size_t nodes = 200);

struct BoundReport {
  std::string lemma;
  std::string integrand;
  std::size_t d = 0;
  double R = 0.0;
  double M = 0.0;
  double B = 0.0;
  double k = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

/// Squared projection error E[(h(W) - h(P_R W))^2], W ~ N(0, I), against
/// the polynomial-class bound (R > 2) or the sub-quadratic exponential
/// bound (R > 1 + sqrt 2), chosen from h's declared class. Needs eps = 1.
BoundReport projection_error_sq(const TestIntegrand& h, const ProjectionConfig& cfg);

/// Variation of h o P_R o Phi^{-1} against the class bound
/// 2^{2d}(M d^{k/2} R^{k+d} + B R^d) or 2^{2d} B R^d e^{M (sqrt(d) R)^k}.
BoundReport hk_variation_bound(const TestIntegrand& h, const ProjectionConfig& cfg);

/// Class of h/g for h = C e^{M|x|^2} and a Student-t product g:
/// G_e(M + slack, B, 2) with B a numeric sup of the value and first
/// derivative of each factor (times 1.05). DomainError for normal marginals
/// or M + slack >= 1/2.
GrowthClass certify_is_ratio(double M, double C, const DistributionSpec& g,
                             double slack = 1e-3);

/// Numeric C(M,B,d): sup over r and |u| <= d of 2^{|u|} B r^{|u|} e^{-(1/2-M) r^2}.
double is_derivative_constant(double M, double B, std::size_t d);

/// E_g[(h_IS(P_R tau) - h_IS(tau))^2] against 16 A B^2 d (R-1)^2
/// e^{-(1-2M)(R-1)^2}, A = E|tau|^2, (M, B) from `ratio`.
/// DomainError unless M < 1/2, R >= 1 + 1/sqrt(1-2M) and eps = 1.
BoundReport is_projection_error_sq(const TestIntegrand& h, const DistributionSpec& g,
                                   const ProjectionConfig& cfg,
                                   const GrowthClass& ratio);

/// Variation of h_IS o P_R o F^{-1} against C(M,B,d) 2^{2d} R^d.
BoundReport is_hk_variation_bound(const TestIntegrand& h, const DistributionSpec& g,
                                  const ProjectionConfig& cfg,
                                  const GrowthClass& ratio);

/// Pointwise check, d = 1, on |x| <= x_max: |h_IS| <= B e^{-(1/2-M)x^2}
/// and |h_IS'| <= 2B|x| e^{-(1/2-M)x^2}. lhs is the worst ratio, rhs = 1.
BoundReport is_derivative_bound(const TestIntegrand& h, const DistributionSpec& g,
                                const GrowthClass& ratio, double x_max = 8.0,
                                std::size_t points = 1601);

struct LemmaSuiteOptions {
  std::vector<std::size_t> dims{1, 2};
  std::vector<double> radii{3.0, 4.0, 5.0, 6.0};
  std::vector<double> rates{0.1, 0.2};
  double nu = 3.0;
  double slack = 1e-3;
};

std::vector<BoundReport> run_lemma_suite(const LemmaSuiteOptions& opts = {});

/// Header and rows `lemma,d,R,M,B,k,lhs,rhs,pass`.
void write_bound_reports(std::ostream& os, const std::vector<BoundReport>& reports);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
  std::size_t points = 0;
};

/// Least-squares line through (x_i, y_i) for first <= i <= last.
/// DomainError with fewer than 4 points or identical abscissae.
SlopeFit slope_fit(std::span<const double> x, std::span<const double> y,
                   std::size_t first = 0,
                   std::size_t last = std::numeric_limits<std::size_t>::max());

/// Asymptotic Kolmogorov-Smirnov p-value for U(0,1) (Stephens' correction).
double ks_uniform_pvalue(std::vector<double> samples);

}  // namespace pqmc
