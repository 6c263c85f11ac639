#include "pqmc/projection.hpp"

#include <cmath>

#include "pqmc/errors.hpp"

namespace pqmc {

ProjectionConfig::ProjectionConfig(double radius, double band)
    : R(radius), eps(band) {
  validate();
}

void ProjectionConfig::validate() const {
  if (!std::isfinite(R) || !std::isfinite(eps) || !(eps > 0.0) || !(eps < R)) {
    throw ConfigError("projection needs 0 < eps < R (got R=" +
                      std::to_string(R) + ", eps=" + std::to_string(eps) + ")");
  }
}

double project_scalar(double x, const ProjectionConfig& cfg) {
  const double R = cfg.R;
  const double e = cfg.eps;
  if (x <= -R) return -R + 0.5 * e;
  // Band quadratics written as x -+ (distance into the band)^2 / (2 eps):
  // the expanded polynomial rounds to values just past |x|.
  if (x < -R + e) {
    const double t = x + (R - e);
    return x + t * t / (2 * e);
  }
  if (x <= R - e) return x;
  if (x < R) {
    const double t = x - (R - e);
    return x - t * t / (2 * e);
  }
  return R - 0.5 * e;
}

double project_derivative(double x, const ProjectionConfig& cfg) {
  const double R = cfg.R;
  const double e = cfg.eps;
  if (x <= -R || x >= R) return 0.0;
  if (x < -R + e) return x / e + R / e;
  if (x <= R - e) return 1.0;
  return -x / e + R / e;
}

void project_vector(std::span<const double> x, std::span<double> out,
                    const ProjectionConfig& cfg) {
  if (x.size() != out.size()) throw DomainError("project_vector: size mismatch");
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = project_scalar(x[j], cfg);
}

std::vector<double> project_vector(std::span<const double> x,
                                   const ProjectionConfig& cfg) {
  std::vector<double> out(x.size());
  project_vector(x, out, cfg);
  return out;
}

std::string to_string(RadiusRule r) {
  switch (r) {
    case RadiusRule::pqmc_poly: return "pqmc-poly";
    case RadiusRule::pqmc_exp: return "pqmc-exp";
    case RadiusRule::is_pqmc: return "is-pqmc";
    case RadiusRule::is_rqmc: return "is-rqmc";
  }
  return "?";
}

RadiusRule parse_radius_rule(std::string_view s) {
  if (s == "pqmc-poly") return RadiusRule::pqmc_poly;
  if (s == "pqmc-exp") return RadiusRule::pqmc_exp;
  if (s == "is-pqmc") return RadiusRule::is_pqmc;
  if (s == "is-rqmc") return RadiusRule::is_rqmc;
  throw DomainError("unknown radius rule '" + std::string(s) + "'");
}

double radius_coefficient(RadiusRule rule, double M) {
  switch (rule) {
    case RadiusRule::pqmc_poly: return 4.0;
    case RadiusRule::pqmc_exp: return 8.0;
    case RadiusRule::is_pqmc:
    case RadiusRule::is_rqmc:
      if (!(M > 0.0 && M < 0.5)) {
        throw DomainError("importance-sampling radius rules need 0 < M < 1/2");
      }
      return (rule == RadiusRule::is_pqmc ? 2.0 : 3.0) / (1.0 - 2.0 * M);
  }
  throw DomainError("unknown radius rule");
}

double radius_schedule(RadiusRule rule, double n, double M, double scale) {
  if (!(n >= 2.0)) throw DomainError("radius schedule needs n >= 2");
  if (!(scale > 0.0)) throw DomainError("radius schedule scale must be positive");
  return std::sqrt(scale * radius_coefficient(rule, M) * std::log(n)) + 1.0;
}

}  // namespace pqmc
