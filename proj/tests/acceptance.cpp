// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pqmc/estimators.hpp"
#include "pqmc/harness.hpp"
#include "pqmc/oracle.hpp"
#include "pqmc/rng.hpp"

using namespace pqmc;

namespace {

int failures = 0;

void verdict(const std::string& name, bool pass, const std::string& detail) {
  std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 3) {
  std::ostringstream os;
  os.precision(prec);
  os << std::fixed << v;
  return os.str();
}

ExperimentPlan sweep_plan(std::size_t d, double M, int m_max) {
  ExperimentPlan p;
  p.d = d;
  p.M = M;
  p.methods = {Method::mc, Method::is_mc, Method::rqmc, Method::is_rqmc};
  p.m_min = 7;
  p.m_max = m_max;
  p.reps = 100;
  p.proposal = "t:3";
  p.window = std::pair<int, int>{10, m_max};
  p.timing = false;
  p.validate();
  return p;
}

std::map<Method, MethodSlope> slopes_by_method(const ExperimentResult& r, std::pair<int, int> w) {
  std::map<Method, MethodSlope> out;
  for (const auto& s : report(r, w)) out[s.method] = s;
  return out;
}

std::string slope_text(const MethodSlope& s) {
  if (s.exact) return "exact";
  return fmt(s.fit.slope) + (s.unstable ? " (unstable, resid " + fmt(s.fit.residual_rms) + ")"
                                        : "");
}

void sweep_d5_m02() {
  const ExperimentPlan p = sweep_plan(5, 0.2, 16);
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentResult r = run_convergence(p);
  const double secs = seconds_since(t0);
  auto s = slopes_by_method(r, *p.window);
  const auto in = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
  verdict("d5-M0.2 is-rqmc slope <= -1.25", s[Method::is_rqmc].fit.slope <= -1.25,
          slope_text(s[Method::is_rqmc]));
  verdict("d5-M0.2 rqmc slope in [-0.90,-0.45]", in(s[Method::rqmc].fit.slope, -0.90, -0.45),
          slope_text(s[Method::rqmc]));
  verdict("d5-M0.2 mc slope in [-0.60,-0.40]", in(s[Method::mc].fit.slope, -0.60, -0.40),
          slope_text(s[Method::mc]));
  verdict("d5-M0.2 is-mc slope in [-0.60,-0.40]", in(s[Method::is_mc].fit.slope, -0.60, -0.40),
          slope_text(s[Method::is_mc]));
  verdict("d5-M0.2 runtime <= 300 s", secs <= 300.0, fmt(secs, 1) + " s");
}

void sweep_d5_m03() {
  const ExperimentPlan p = sweep_plan(5, 0.3, 16);
  const ExperimentResult r = run_convergence(p);
  auto s = slopes_by_method(r, *p.window);
  verdict("d5-M0.3 is-rqmc slope <= -1.25", s[Method::is_rqmc].fit.slope <= -1.25,
          slope_text(s[Method::is_rqmc]));
  const MethodSlope& mc = s[Method::mc];
  verdict("d5-M0.3 mc unstable or slope > -0.4", mc.unstable || mc.fit.slope > -0.4,
          slope_text(mc));
}

void sweep_d30() {
  const ExperimentPlan p = sweep_plan(30, 0.2, 14);
  const ExperimentResult r = run_convergence(p);
  bool ok = true;
  std::string detail;
  for (int m = 12; m <= 14; ++m) {
    double is_rqmc = 0.0;
    double best_other = INFINITY;
    for (const auto& row : r.rows) {
      if (row.m != m) continue;
      if (row.method == Method::is_rqmc) is_rqmc = row.rmse;
      else best_other = std::min(best_other, row.rmse);
    }
    ok = ok && is_rqmc < best_other;
    detail += "m=" + std::to_string(m) + " is-rqmc " + fmt(is_rqmc, 5) + " vs " +
              fmt(best_other, 5) + "; ";
  }
  verdict("d30-M0.2 is-rqmc rmse smallest at m=12..14", ok, detail);
}

void lemma_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto reports = run_lemma_suite();
  const double secs = seconds_since(t0);
  std::size_t passed = 0;
  std::string first_fail;
  for (const auto& r : reports) {
    if (r.pass) ++passed;
    else if (first_fail.empty()) first_fail = " first failure " + r.lemma + "/" + r.integrand;
  }
  verdict("lemma bound suite", passed == reports.size() && secs <= 120.0,
          std::to_string(passed) + "/" + std::to_string(reports.size()) + " in " +
              fmt(secs, 1) + " s" + first_fail);
}

void net_suite() {
  bool nets = true;
  for (std::uint64_t s = 0; s < 32; ++s) {
    for (int d = 1; d <= 2; ++d) {
      for (int m = 1; m <= 10; ++m) {
        const PointSet p = owen_scramble(sobol_points(m, d), derive_key(7, {s}));
        NetParams np;
        np.m = m;
        np.dim = d;
        nets = nets && check_net(p, np);
      }
    }
  }
  verdict("scrambled nets t=0 (32 seeds, d<=2, m<=10)", nets, nets ? "all nets" : "net violated");

  std::vector<double> pooled;
  for (std::uint64_t s = 0; s < 32; ++s) {
    const PointSet p = owen_scramble(sobol_points(8, 2), derive_key(8, {s}));
    pooled.insert(pooled.end(), p.values().begin(), p.values().end());
  }
  const double pv = ks_uniform_pvalue(pooled);
  verdict("KS uniformity of pooled scrambled coordinates", pv > 0.01, "p = " + fmt(pv, 4));

  bool vdc = true;
  for (int m = 0; m <= 10; ++m) vdc = vdc && star_discrepancy(sobol_points(m, 1)) == std::ldexp(1.0, -m);
  verdict("van der Corput star discrepancy 2^-m", vdc, "m = 0..10");
}

void collapse_identities() {
  CounterRng rng(20240601);
  int bad = 0;
  for (int c = 0; c < 100; ++c) {
    const std::size_t d = 1 + static_cast<std::size_t>(rng() % 5);
    const int m = 4 + static_cast<int>(rng() % 7);
    const double M = 0.05 + 0.4 * rng.uniform_open();
    const std::uint64_t seed = rng();
    const TestIntegrand h = make_paper_test_function(M, d);
    const auto normal = DistributionSpec::standard_normal(d);
    const PointSet p = (c % 2 == 0) ? owen_scramble(sobol_points(m, static_cast<int>(d)), seed)
                                    : digital_shift(sobol_points(m, static_cast<int>(d)), seed);

    // Identity proposal: the IS estimators reduce to their plain versions.
    const ProjectionConfig cfg(2.0 + 4.0 * rng.uniform_open());
    if (is_pqmc_estimate(h, normal, p, cfg).value != pqmc_estimate(h, normal, p, cfg).value) ++bad;
    if (is_rqmc_estimate(h, normal, p).value != qmc_estimate(h, normal, p).value) ++bad;

    // Inside the radius: the projection is the identity on every point.
    double reach = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      for (double x : normal.map_inverse(p.row(i))) reach = std::max(reach, std::fabs(x));
    }
    const ProjectionConfig wide(reach + 1.0 + 1.0, 1.0);
    if (pqmc_estimate(h, normal, p, wide).value != qmc_estimate(h, normal, p).value) ++bad;
  }
  verdict("collapse identities (100 configurations)", bad == 0,
          std::to_string(bad) + " mismatches");
}

void unbiasedness() {
  const TestIntegrand h = make_paper_test_function(0.2, 2);
  const auto t3 = DistributionSpec::student_t(2, 3.0);
  const double truth = quad_expectation(h.eval, DistributionSpec::standard_normal(2));
  const PointSet base = sobol_points(10, 2);
  std::vector<double> v;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    v.push_back(is_rqmc_estimate(h, t3, owen_scramble(base, derive_key(31, {s}))).value);
  }
  CompensatedSum sum;
  for (double x : v) sum.add(x);
  const double mean = sum.value() / 1000.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double se = std::sqrt(ss / 999.0 / 1000.0);
  verdict("is-rqmc unbiased (1000 scrambles)", std::fabs(mean - truth) <= 3.0 * se,
          "mean " + fmt(mean, 6) + ", truth " + fmt(truth, 9) + ", se " + fmt(se, 6));
}

void derivative_bound() {
  const auto t = DistributionSpec::student_t(1, 3.0);
  bool ok = true;
  std::string detail;
  for (double M : {0.1, 0.2, 0.3}) {
    const TestIntegrand h = make_paper_test_function(M, 1);
    const BoundReport r = is_derivative_bound(h, t, certify_is_ratio(M, h.growth->B, t));
    ok = ok && r.pass;
    detail += "M=" + fmt(M, 1) + " worst ratio " + fmt(r.lhs, 5) + "; ";
  }
  verdict("derivative bound on |x| <= 8", ok, detail);
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void()>>> criteria{
      {"nets", net_suite},
      {"collapse", collapse_identities},
      {"unbiasedness", unbiasedness},
      {"derivative", derivative_bound},
      {"lemma", lemma_suite},
      {"d5-M0.2", sweep_d5_m02},
      {"d5-M0.3", sweep_d5_m03},
      {"d30", sweep_d30},
  };
  for (const auto& [name, run] : criteria) {
    try {
      run();
    } catch (const std::exception& e) {
      verdict(name, false, std::string("error: ") + e.what());
    }
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
