#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pqmc/method.hpp"

namespace pqmc {

enum class GrowthKind { polynomial, exponential };

/// G_p(M,B,k): |f| <= M|x|^k + B;  G_e(M,B,k): |f| <= B exp(M|x|^k).
/// The same bound is meant to hold for every mixed partial of f.
struct GrowthClass {
  GrowthKind kind = GrowthKind::polynomial;
  double M = 1.0;
  double B = 1.0;
  double k = 1.0;

  static GrowthClass poly(double M, double B, double k);
  static GrowthClass expo(double M, double B, double k);

  /// DomainError unless M, B, k are finite and strictly positive.
  void validate() const;

  /// Radial bound at |x| = r.
  [[nodiscard]] double bound(double r) const;
  [[nodiscard]] double log_bound(double r) const;
  [[nodiscard]] std::string to_string() const;

  friend bool operator==(const GrowthClass&, const GrowthClass&) = default;
};

struct AlgebraOptions {
  /// Strict-inequality slack added to M in the "for any eps > 0" cases.
  double slack = 1e-3;
  /// Multiplier applied to numerically certified constants.
  double safety = 1.05;
};

GrowthClass scale_class(double c, const GrowthClass& g);
GrowthClass add_classes(const GrowthClass& g1, const GrowthClass& g2,
                        const AlgebraOptions& opts = {});
GrowthClass mul_classes(const GrowthClass& g1, const GrowthClass& g2,
                        const AlgebraOptions& opts = {});
/// Class of outer(inner(x)); DomainError for exponential-of-exponential.
GrowthClass compose_classes(const GrowthClass& outer, const GrowthClass& inner,
                            const AlgebraOptions& opts = {});

/// Radii used by numeric certification: 801 points on [0,8], then a
/// geometric continuation to `r_max` (if larger than 8).
std::vector<double> certification_grid(double r_max = 8.0);

enum class Classification { qmc_friendly, fast, divergent_risk };

std::string to_string(Classification c);
Classification classify(const GrowthClass& g);
/// max_j A_j of the boundary growth condition for Gaussian transport
/// (2M for k = 2; 0 below quadratic growth; +inf above).
double boundary_exponent(const GrowthClass& g);
/// Leading exponent of n in the error (RMSE for randomized methods),
/// ignoring logarithmic factors. DomainError for divergent-risk classes.
double predicted_rate(const GrowthClass& g, Method method);

using Evaluator = std::function<double(std::span<const double>)>;
using GradientFn = std::function<void(std::span<const double>, std::span<double>)>;

struct TestIntegrand {
  std::string name;
  std::size_t dim = 1;
  Evaluator eval;
  std::optional<GrowthClass> growth;
  /// E[h(W)] for W ~ N(0, I_d), when known in closed form.
  std::optional<double> expectation;
  GradientFn gradient;  // empty when not available
  /// log h for strictly positive integrands (empty otherwise); lets
  /// weighted evaluations avoid inf * 0 far out in the tails.
  Evaluator log_eval;

  double operator()(std::span<const double> x) const { return eval(x); }
};

/// h(x) = (1-2M)^(d/2) exp(M|x|^2); E[h(W)] = 1. DomainError unless 0<M<1/2.
TestIntegrand make_paper_test_function(double M, std::size_t d);
TestIntegrand make_constant(double c, std::size_t d);
/// h(x) = sum_j x_j, declared G_p(sqrt(d), 1, 1).
TestIntegrand make_linear(std::size_t d);
/// h(x) = |x|^2, declared G_p(1, 1, 2).
TestIntegrand make_quadratic(std::size_t d);
/// h(x) = exp(a sum_j x_j), declared G_e(a sqrt(d), 1, 1) for 0 < a <= 1.
TestIntegrand make_exp_linear(double a, std::size_t d);

/// Largest value of |h(x)| / class bound over radial rays on the grid
/// (axis and diagonal directions); <= 1 when the declaration holds.
double declared_bound_ratio(const TestIntegrand& h, double r_max = 8.0,
                            std::size_t points = 801);

}  // namespace pqmc
