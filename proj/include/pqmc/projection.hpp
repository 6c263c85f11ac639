#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pqmc {

/// Smoothed projection P_R: identity on [-R+eps, R-eps], quadratic blend
/// bands of width eps, constant +-(R - eps/2) beyond +-R.
struct ProjectionConfig {
  double R = 0.0;
  double eps = 1.0;

  ProjectionConfig() = default;
  /// Throws ConfigError unless 0 < eps < R (both finite).
  ProjectionConfig(double radius, double band = 1.0);

  void validate() const;

  friend bool operator==(const ProjectionConfig&, const ProjectionConfig&) = default;
};

/// P_R(x) for x in [-inf, +inf].
double project_scalar(double x, const ProjectionConfig& cfg);
/// dP_R/dx; zero outside (-R, R).
double project_derivative(double x, const ProjectionConfig& cfg);
void project_vector(std::span<const double> x, std::span<double> out,
                    const ProjectionConfig& cfg);
std::vector<double> project_vector(std::span<const double> x,
                                   const ProjectionConfig& cfg);

enum class RadiusRule { pqmc_poly, pqmc_exp, is_pqmc, is_rqmc };

std::string to_string(RadiusRule r);
RadiusRule parse_radius_rule(std::string_view s);

/// Coefficient c of R = sqrt(c * ln n) + 1 for a rule; IS rules depend on M
/// and throw DomainError unless 0 < M < 1/2.
double radius_coefficient(RadiusRule rule, double M = 0.0);

/// R = sqrt(scale * c * ln n) + 1, natural log. `scale` (default 1) lets
/// experiments stretch or shrink the schedule. DomainError if n < 2.
double radius_schedule(RadiusRule rule, double n, double M = 0.0,
                       double scale = 1.0);

}  // namespace pqmc
