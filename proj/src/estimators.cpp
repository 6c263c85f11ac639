#include "pqmc/estimators.hpp"

#include <cmath>
#include <vector>

#include "pqmc/errors.hpp"
#include "pqmc/rng.hpp"

namespace pqmc {

namespace {

void check_dims(const TestIntegrand& h, const DistributionSpec& g) {
  if (h.dim != g.dim()) {
    throw DomainError("integrand '" + h.name + "' has dimension " +
                      std::to_string(h.dim) + " but the distribution has " +
                      std::to_string(g.dim()));
  }
}

void check_points(const TestIntegrand& h, const PointSet& p) {
  if (p.dim() != h.dim) {
    throw DomainError("point set dimension " + std::to_string(p.dim()) +
                      " does not match integrand dimension " +
                      std::to_string(h.dim));
  }
}

// Mean of f over the rows of p; f receives the transformed point.
template <class F>
double transformed_mean(const PointSet& p, const DistributionSpec& g, F&& f) {
  std::vector<double> x(p.dim());
  CompensatedSum sum;
  for (std::size_t i = 0; i < p.size(); ++i) {
    g.map_inverse(p.row(i), x);
    sum.add(f(std::span<double>(x)));
  }
  return sum.value() / static_cast<double>(p.size());
}

double unprojected_mean(const TestIntegrand& h, const DistributionSpec& g,
                        const PointSet& p) {
  return transformed_mean(p, g, [&](std::span<double> x) {
    for (double v : x) {
      if (std::isinf(v)) {
        throw SingularPointError(
            "point maps to an infinite coordinate; plain estimators cannot "
            "evaluate it (use a randomized point set or a projected method)");
      }
    }
    return h.eval(x);
  });
}

double projected_mean(const TestIntegrand& h, const DistributionSpec& g,
                      const PointSet& p, const ProjectionConfig& cfg) {
  cfg.validate();
  return transformed_mean(p, g, [&](std::span<double> x) {
    for (double& v : x) v = project_scalar(v, cfg);
    return h.eval(x);
  });
}

}  // namespace

void check_is_proposal(const DistributionSpec& g) {
  for (std::size_t j = 0; j < g.dim(); ++j) {
    const Marginal& m = g.marginal(j);
    if (m.family() == Family::student_t && m.nu() < 3.0) {
      throw ConfigError("importance sampling needs Student-t proposals with nu >= 3");
    }
  }
}

TestIntegrand is_weight(const TestIntegrand& h, const DistributionSpec& g) {
  check_dims(h, g);
  if (g.is_standard_normal()) return h;
  TestIntegrand w;
  w.name = "IS[" + h.name + " | " + g.describe() + "]";
  w.dim = h.dim;
  w.expectation = h.expectation;
  const auto log_ratio = [g](std::span<const double> x) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      s += normal_log_pdf(x[j]) - g.marginal(j).log_pdf(x[j]);
    }
    return s;
  };
  if (h.log_eval) {
    w.eval = [lf = h.log_eval, log_ratio](std::span<const double> x) {
      return std::exp(lf(x) + log_ratio(x));
    };
  } else {
    w.eval = [f = h.eval, log_ratio](std::span<const double> x) {
      return f(x) * std::exp(log_ratio(x));
    };
  }
  return w;
}

Estimate mc_estimate(const TestIntegrand& h, const DistributionSpec& g,
                     std::size_t n, std::uint64_t seed) {
  check_dims(h, g);
  if (n == 0) throw DomainError("mc_estimate needs n > 0");
  const bool is = !g.is_standard_normal();
  if (is) check_is_proposal(g);
  const TestIntegrand f = is_weight(h, g);
  CounterRng rng(seed);
  const std::size_t d = h.dim;
  std::vector<double> u(d);
  std::vector<double> x(d);
  CompensatedSum sum;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) u[j] = rng.uniform_open();
    g.map_inverse(u, x);
    sum.add(f.eval(x));
  }
  return {sum.value() / static_cast<double>(n), n, std::nullopt,
          is ? Method::is_mc : Method::mc, seed};
}

Estimate qmc_estimate(const TestIntegrand& h, const DistributionSpec& g,
                      const PointSet& points) {
  check_dims(h, g);
  check_points(h, points);
  const bool randomized = points.meta().randomization != Randomization::none;
  return {unprojected_mean(h, g, points), points.size(), std::nullopt,
          randomized ? Method::rqmc : Method::qmc, points.meta().seed};
}

Estimate pqmc_estimate(const TestIntegrand& h, const DistributionSpec& g,
                       const PointSet& points, const ProjectionConfig& cfg) {
  check_dims(h, g);
  check_points(h, points);
  return {projected_mean(h, g, points, cfg), points.size(), cfg.R, Method::pqmc,
          points.meta().seed};
}

Estimate is_pqmc_estimate(const TestIntegrand& h, const DistributionSpec& g,
                          const PointSet& points, const ProjectionConfig& cfg) {
  check_dims(h, g);
  check_points(h, points);
  check_is_proposal(g);
  const TestIntegrand w = is_weight(h, g);
  return {projected_mean(w, g, points, cfg), points.size(), cfg.R,
          Method::is_pqmc, points.meta().seed};
}

Estimate is_rqmc_estimate(const TestIntegrand& h, const DistributionSpec& g,
                          const PointSet& points) {
  check_dims(h, g);
  check_points(h, points);
  check_is_proposal(g);
  if (points.meta().randomization == Randomization::none) {
    throw ConfigError("is-rqmc needs a randomized (scrambled or shifted) point set");
  }
  const TestIntegrand w = is_weight(h, g);
  return {unprojected_mean(w, g, points), points.size(), std::nullopt,
          Method::is_rqmc, points.meta().seed};
}

double schedule_rate(const GrowthClass& g, double slack) {
  if (g.kind == GrowthKind::exponential && g.k == 2.0) return g.M;
  return slack;
}

RadiusRule default_rule(Method method, const GrowthClass& g) {
  switch (method) {
    case Method::pqmc:
      return g.kind == GrowthKind::polynomial ? RadiusRule::pqmc_poly
                                              : RadiusRule::pqmc_exp;
    case Method::is_pqmc: return RadiusRule::is_pqmc;
    case Method::is_rqmc: return RadiusRule::is_rqmc;
    default: break;
  }
  throw ConfigError("method " + to_string(method) + " has no radius rule");
}

void EstimatorConfig::validate() const {
  if (!integrand.eval) throw ConfigError("estimator needs an integrand");
  if (m < 0 || m > kMaxSobolLog2) {
    throw ConfigError("m must lie in [0, " + std::to_string(kMaxSobolLog2) + "]");
  }
  if (proposal) {
    if (proposal->dim() != integrand.dim) {
      throw ConfigError("proposal dimension does not match the integrand");
    }
    if (!uses_importance_sampling(method) && !proposal->is_standard_normal()) {
      throw ConfigError("method " + to_string(method) +
                        " samples from the standard normal; a proposal needs an IS method");
    }
    check_is_proposal(*proposal);
  }
  if (uses_projection(method) && !projection && !rule && !integrand.growth) {
    throw ConfigError("projected method needs a radius, a rule or a declared growth class");
  }
  if (method == Method::qmc && randomization != Randomization::none) {
    throw ConfigError("qmc uses the deterministic point set; choose rqmc for randomized points");
  }
  if ((method == Method::rqmc || method == Method::is_rqmc) &&
      randomization == Randomization::none) {
    throw ConfigError(to_string(method) + " needs a randomized point set");
  }
  if (projection) projection->validate();
}

DistributionSpec EstimatorConfig::target_proposal() const {
  if (proposal) return *proposal;
  return DistributionSpec::standard_normal(integrand.dim);
}

std::optional<ProjectionConfig> EstimatorConfig::resolve_projection() const {
  if (!uses_projection(method)) return std::nullopt;
  if (projection) return projection;
  const GrowthClass g = integrand.growth ? *integrand.growth
                                         : GrowthClass::poly(1.0, 1.0, 1.0);
  const RadiusRule r = rule ? *rule : default_rule(method, g);
  const double n = std::ldexp(1.0, m);
  return ProjectionConfig(radius_schedule(r, n, schedule_rate(g), radius_scale), eps);
}

Estimate estimate_with(const EstimatorConfig& cfg, const PointSet* points) {
  const DistributionSpec g = cfg.target_proposal();
  const TestIntegrand& h = cfg.integrand;
  const std::size_t n = std::size_t{1} << cfg.m;
  if (!uses_net(cfg.method)) {
    Estimate e = mc_estimate(h, g, n, cfg.seed);
    e.method = cfg.method;
    return e;
  }
  if (points == nullptr) throw ConfigError("net method needs a point set");
  Estimate e;
  switch (cfg.method) {
    case Method::qmc:
    case Method::rqmc:
      e = qmc_estimate(h, g, *points);
      break;
    case Method::pqmc:
      e = pqmc_estimate(h, g, *points, *cfg.resolve_projection());
      break;
    case Method::is_pqmc:
      e = is_pqmc_estimate(h, g, *points, *cfg.resolve_projection());
      break;
    case Method::is_rqmc:
      e = is_rqmc_estimate(h, g, *points);
      break;
    default:
      break;
  }
  e.method = cfg.method;
  e.seed = cfg.seed;
  return e;
}

Estimate estimate(const EstimatorConfig& cfg) {
  cfg.validate();
  if (!uses_net(cfg.method)) return estimate_with(cfg, nullptr);
  PointSet base = sobol_points(cfg.m, static_cast<int>(cfg.integrand.dim));
  switch (cfg.randomization) {
    case Randomization::none:
      return estimate_with(cfg, &base);
    case Randomization::owen_scramble: {
      const PointSet p = owen_scramble(base, cfg.seed);
      return estimate_with(cfg, &p);
    }
    case Randomization::digital_shift: {
      const PointSet p = digital_shift(base, cfg.seed);
      return estimate_with(cfg, &p);
    }
  }
  throw ConfigError("unknown randomization");
}

}  // namespace pqmc
