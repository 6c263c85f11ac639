#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pqmc/dist.hpp"
#include "pqmc/growth.hpp"
#include "pqmc/lowdisc.hpp"
#include "pqmc/method.hpp"
#include "pqmc/oracle.hpp"

namespace pqmc {

inline constexpr int kSchemaVersion = 1;

/// Integrand from a short spec string:
///   paper                 C e^{M|x|^2} with E = 1 (uses M)
///   constant:<c>          h = c
///   linear | quadratic    sum x_j | |x|^2
///   exp-linear:<a>        e^{a sum x_j}
///   class:<expression>    radial bound function of a class expression
/// ValidationError on anything else.
TestIntegrand make_named_integrand(std::string_view spec, std::size_t d, double M);

struct ExperimentPlan {
  std::string integrand = "paper";
  std::size_t d = 5;
  double M = 0.2;
  std::vector<Method> methods{Method::mc, Method::is_mc, Method::rqmc, Method::is_rqmc};
  int m_min = 7;
  int m_max = 16;
  std::size_t reps = 100;
  /// Proposal for the IS methods ("t:<nu>" or "normal").
  std::string proposal = "t:3";
  std::uint64_t seed = 20240601;
  std::string output;
  Randomization randomization = Randomization::owen_scramble;
  /// Slope window in m; defaults to [max(8, m_min + 2), m_max].
  std::optional<std::pair<int, int>> window;
  /// Fixed radius for every projected row, overriding the schedule.
  std::optional<double> radius;
  double radius_scale = 1.0;
  double eps = 1.0;
  /// Record wall time per row; off gives a fully reproducible CSV.
  bool timing = true;

  /// Plain-text `key = value` lines, `#` comments. ValidationError on
  /// unknown keys or malformed values. Does not call validate().
  static ExperimentPlan parse(std::string_view text);
  static ExperimentPlan load(const std::string& path);
  /// Canonical text form; parse(to_text()) reproduces the plan.
  [[nodiscard]] std::string to_text() const;

  /// ValidationError on empty method lists, bad m-range, reps < 2, unknown
  /// integrands/proposals, divergent-risk classes, plain qmc, or d >= 3
  /// without a known expectation.
  void validate() const;

  [[nodiscard]] TestIntegrand build_integrand() const;
  [[nodiscard]] DistributionSpec build_proposal() const;
  [[nodiscard]] std::pair<int, int> slope_window() const;
};

/// Radius for (method, m): the plan override if set, else the method's
/// default rule at n = 2^m. nullopt for methods without a radius rule.
std::optional<double> resolve_radius(const ExperimentPlan& plan, Method method, int m);

/// E[h(W)]: the integrand's known expectation, else quadrature (d <= 2).
double plan_truth(const ExperimentPlan& plan);

struct ResultRow {
  Method method = Method::mc;
  std::size_t d = 0;
  double M = 0.0;
  double nu = 0.0;
  int m = 0;
  std::size_t n = 0;
  std::size_t reps = 0;
  double rmse = 0.0;
  double mean_estimate = 0.0;
  std::optional<double> R_used;
  std::uint64_t seed = 0;
  double wall_time_ms = 0.0;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  double truth = 0.0;
};

/// Seed of the (method, m) row; repetition r uses derive_key(row_seed, {r}).
std::uint64_t row_seed(std::uint64_t master, Method method, int m);

/// Repetition sweep, repetitions in parallel when built with OpenMP.
/// `threads` = 0 keeps the OpenMP default.
ExperimentResult run_convergence(const ExperimentPlan& plan, int threads = 0);

/// Same sweep on one thread with no OpenMP involvement.
ExperimentResult run_convergence_reference(const ExperimentPlan& plan);

inline constexpr std::string_view kResultHeader =
    "method,d,M,nu,m,n,reps,rmse,mean_estimate,R_used,seed,wall_time_ms";

void write_result_csv(std::ostream& os, const ExperimentResult& result);
/// ValidationError when the header differs from kResultHeader or a row is
/// malformed.
ExperimentResult read_result_csv(std::istream& is);

/// JSON sidecar: schema version, git hash, truth and the plan echo.
std::string result_metadata_json(const ExperimentPlan& plan, const ExperimentResult& result);

/// Writes `path` and `path + ".json"`.
void save_result(const std::string& path, const ExperimentPlan& plan,
                 const ExperimentResult& result);

std::string git_hash();

inline constexpr double kUnstableResidual = 0.2;  // log2 units

struct MethodSlope {
  Method method = Method::mc;
  int first_m = 0;
  int last_m = 0;
  SlopeFit fit;
  /// Every rmse in the window is 0 (exact method); no fit.
  bool exact = false;
  bool unstable = false;
};

/// Least-squares slope of log2(rmse) against log2(n) per method over the
/// window [first, last] in m. ValidationError if a method has fewer than 4
/// rows inside the window or the result is empty.
std::vector<MethodSlope> report(const ExperimentResult& result, std::pair<int, int> window);

void write_report_table(std::ostream& os, const std::vector<MethodSlope>& slopes);
/// Columns method,first_m,last_m,slope,intercept,residual_rms,points,status.
void write_report_csv(std::ostream& os, const std::vector<MethodSlope>& slopes);

}  // namespace pqmc
