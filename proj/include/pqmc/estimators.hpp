#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>

#include "pqmc/dist.hpp"
#include "pqmc/growth.hpp"
#include "pqmc/lowdisc.hpp"
#include "pqmc/method.hpp"
#include "pqmc/projection.hpp"

namespace pqmc {

struct Estimate {
  double value = 0.0;
  std::size_t n = 0;
  std::optional<double> R_used;
  Method method = Method::mc;
  std::uint64_t seed = 0;
};

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) comp_ += (sum_ - t) + v;
    else comp_ += (v - t) + sum_;
    sum_ = t;
  }
  [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// h_IS(x) = phi_d(x) h(x) / g(x), evaluated through log densities. With a
/// standard normal proposal the integrand is returned unchanged.
/// DomainError if the dimensions differ.
TestIntegrand is_weight(const TestIntegrand& h, const DistributionSpec& g);

/// Proposal check shared by IS estimators: each marginal must be normal or
/// Student-t with nu >= 3 (finite second moment). ConfigError otherwise.
void check_is_proposal(const DistributionSpec& g);

/// (1/n) sum h(F^{-1}(u_i)) with u_i ~ U(0,1)^d from CounterRng(seed).
/// A non-normal `g` gives the importance-sampled estimator (is-mc).
Estimate mc_estimate(const TestIntegrand& h, const DistributionSpec& g,
                     std::size_t n, std::uint64_t seed);

/// (1/n) sum h(F^{-1}(y_i)) over the given points, no projection.
/// SingularPointError if some y_i maps to an infinite coordinate.
/// Reported as qmc for unrandomized points, rqmc otherwise.
Estimate qmc_estimate(const TestIntegrand& h, const DistributionSpec& g,
                      const PointSet& points);

/// (1/n) sum h(P_R(F^{-1}(y_i))); infinite quantiles are saturated by P_R.
Estimate pqmc_estimate(const TestIntegrand& h, const DistributionSpec& g,
                       const PointSet& points, const ProjectionConfig& cfg);

/// Projected estimator of h_IS under proposal g.
Estimate is_pqmc_estimate(const TestIntegrand& h, const DistributionSpec& g,
                          const PointSet& points, const ProjectionConfig& cfg);

/// Unprojected estimator of h_IS; ConfigError for unrandomized points.
Estimate is_rqmc_estimate(const TestIntegrand& h, const DistributionSpec& g,
                          const PointSet& points);

/// Growth rate fed to the importance-sampling radius rules: M for
/// exponential classes of order 2, otherwise the algebra slack.
double schedule_rate(const GrowthClass& g, double slack = 1e-3);

/// Default radius rule bound to a projected method and integrand class.
RadiusRule default_rule(Method method, const GrowthClass& g);

struct EstimatorConfig {
  Method method = Method::rqmc;
  TestIntegrand integrand;
  /// Proposal for IS methods; the standard normal is used when absent.
  std::optional<DistributionSpec> proposal;
  /// Explicit projection; otherwise the radius follows `rule` (or the
  /// default rule of the method) at n = 2^m.
  std::optional<ProjectionConfig> projection;
  std::optional<RadiusRule> rule;
  double radius_scale = 1.0;
  double eps = 1.0;
  int m = 10;
  Randomization randomization = Randomization::owen_scramble;
  std::uint64_t seed = 0;

  /// ConfigError on inconsistent settings.
  void validate() const;
  [[nodiscard]] DistributionSpec target_proposal() const;
  [[nodiscard]] std::optional<ProjectionConfig> resolve_projection() const;
};

/// Builds the point source for the configuration and runs the estimator.
Estimate estimate(const EstimatorConfig& cfg);

/// Estimator on a prepared point set (reused across repetitions by the
/// harness); mc / is-mc ignore `points` and draw n = 2^m uniforms.
Estimate estimate_with(const EstimatorConfig& cfg, const PointSet* points);

}  // namespace pqmc
