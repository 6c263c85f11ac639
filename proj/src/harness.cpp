#include "pqmc/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#ifdef PQMC_HAVE_OPENMP
#include <omp.h>
#endif

#include "pqmc/class_expr.hpp"
#include "pqmc/errors.hpp"
#include "pqmc/estimators.hpp"
#include "pqmc/projection.hpp"
#include "pqmc/rng.hpp"

#ifndef PQMC_GIT_HASH
#define PQMC_GIT_HASH "unknown"
#endif

namespace pqmc {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view s, std::string_view what) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ValidationError(std::string(what) + ": not a number: '" + std::string(s) + "'");
  }
  return v;
}

template <class Int>
Int parse_int(std::string_view s, std::string_view what) {
  s = trim(s);
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ValidationError(std::string(what) + ": not an integer: '" + std::string(s) + "'");
  }
  return v;
}

std::pair<int, int> parse_range(std::string_view s, std::string_view what) {
  const std::size_t pos = s.find("..");
  if (pos == std::string_view::npos) {
    throw ValidationError(std::string(what) + ": expected a range 'a..b'");
  }
  return {parse_int<int>(s.substr(0, pos), what), parse_int<int>(s.substr(pos + 2), what)};
}

bool parse_bool(std::string_view s, std::string_view what) {
  s = trim(s);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ValidationError(std::string(what) + ": expected true/false");
}

// Shortest round-trip decimal.
std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

struct Sweep {
  const ExperimentPlan& plan;
  TestIntegrand h;
  DistributionSpec proposal;
  double truth;
};

ResultRow run_row(const Sweep& s, Method method, int m, const PointSet* base,
                  bool parallel, int threads) {
  const ExperimentPlan& plan = s.plan;
  EstimatorConfig cfg;
  cfg.method = method;
  cfg.integrand = s.h;
  if (uses_importance_sampling(method)) cfg.proposal = s.proposal;
  const std::optional<double> R = resolve_radius(plan, method, m);
  if (uses_projection(method)) cfg.projection = ProjectionConfig(*R, plan.eps);
  cfg.m = m;
  cfg.randomization = plan.randomization;

  ResultRow row;
  row.method = method;
  row.d = plan.d;
  row.M = s.h.growth ? s.h.growth->M : plan.M;
  if (plan.integrand == "paper") row.M = plan.M;
  // Non-IS rows sample the standard normal: nu = inf.
  row.nu = uses_importance_sampling(method) ? s.proposal.min_nu()
                                            : std::numeric_limits<double>::infinity();
  row.m = m;
  row.n = std::size_t{1} << m;
  row.reps = plan.reps;
  if (uses_projection(method)) row.R_used = R;
  row.seed = row_seed(plan.seed, method, m);

  std::vector<double> est(plan.reps);
  const auto one = [&](std::size_t r) {
    EstimatorConfig c = cfg;
    c.seed = derive_key(row.seed, {r});
    if (!uses_net(method)) {
      est[r] = estimate_with(c, nullptr).value;
      return;
    }
    const PointSet p = plan.randomization == Randomization::digital_shift
                           ? digital_shift(*base, c.seed)
                           : owen_scramble(*base, c.seed);
    est[r] = estimate_with(c, &p).value;
  };

  const auto start = std::chrono::steady_clock::now();
  const auto reps = static_cast<std::ptrdiff_t>(plan.reps);
#ifdef PQMC_HAVE_OPENMP
  if (parallel) {
    std::exception_ptr failure;
    const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(nt)
    for (std::ptrdiff_t r = 0; r < reps; ++r) {
      try {
        one(static_cast<std::size_t>(r));
      } catch (...) {
#pragma omp critical(pqmc_sweep_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    for (std::ptrdiff_t r = 0; r < reps; ++r) one(static_cast<std::size_t>(r));
  }
#else
  (void)parallel;
  (void)threads;
  for (std::ptrdiff_t r = 0; r < reps; ++r) one(static_cast<std::size_t>(r));
#endif
  const auto stop = std::chrono::steady_clock::now();

  // Aggregation in repetition order, so the thread count cannot matter.
  CompensatedSum mean;
  CompensatedSum sq;
  for (double e : est) {
    mean.add(e);
    sq.add((e - s.truth) * (e - s.truth));
  }
  const double k = static_cast<double>(plan.reps);
  row.mean_estimate = mean.value() / k;
  row.rmse = std::sqrt(sq.value() / k);
  row.wall_time_ms =
      plan.timing ? std::chrono::duration<double, std::milli>(stop - start).count() : 0.0;
  return row;
}

ExperimentResult sweep(const ExperimentPlan& plan, bool parallel, int threads) {
  plan.validate();
  const Sweep s{plan, plan.build_integrand(), plan.build_proposal(), plan_truth(plan)};
  ExperimentResult result;
  result.truth = s.truth;
  const bool any_net = std::any_of(plan.methods.begin(), plan.methods.end(), uses_net);
  std::map<std::pair<int, int>, ResultRow> rows;  // (method index, m)
  for (int m = plan.m_min; m <= plan.m_max; ++m) {
    std::optional<PointSet> base;
    if (any_net) base = sobol_points(m, static_cast<int>(plan.d));
    for (std::size_t i = 0; i < plan.methods.size(); ++i) {
      rows[{static_cast<int>(i), m}] =
          run_row(s, plan.methods[i], m, base ? &*base : nullptr, parallel, threads);
    }
  }
  for (auto& [key, row] : rows) result.rows.push_back(row);
  return result;
}

}  // namespace

TestIntegrand make_named_integrand(std::string_view spec, std::size_t d, double M) {
  spec = trim(spec);
  const std::size_t colon = spec.find(':');
  const std::string_view head = spec.substr(0, colon);
  const std::string_view arg =
      colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);
  const auto no_arg = [&] {
    if (colon != std::string_view::npos) {
      throw ValidationError("integrand '" + std::string(head) + "' takes no argument");
    }
  };
  if (head == "paper") {
    no_arg();
    return make_paper_test_function(M, d);
  }
  if (head == "linear") {
    no_arg();
    return make_linear(d);
  }
  if (head == "quadratic") {
    no_arg();
    return make_quadratic(d);
  }
  if (head == "constant") return make_constant(arg.empty() ? 1.0 : parse_double(arg, "constant"), d);
  if (head == "exp-linear") return make_exp_linear(parse_double(arg, "exp-linear"), d);
  if (head == "class") return ClassExpression::parse(arg).integrand(d);
  throw ValidationError("unknown integrand '" + std::string(spec) +
                        "' (paper, constant:<c>, linear, quadratic, exp-linear:<a>, class:<expr>)");
}

ExperimentPlan ExperimentPlan::parse(std::string_view text) {
  ExperimentPlan p;
  std::size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("plan line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key == "integrand") {
      p.integrand = std::string(value);
    } else if (key == "d") {
      p.d = parse_int<std::size_t>(value, key);
    } else if (key == "M") {
      p.M = parse_double(value, key);
    } else if (key == "methods") {
      p.methods.clear();
      for (std::string_view item : split(value, ',')) {
        item = trim(item);
        if (!item.empty()) p.methods.push_back(parse_method(item));
      }
    } else if (key == "m") {
      std::tie(p.m_min, p.m_max) = parse_range(value, key);
    } else if (key == "m_min") {
      p.m_min = parse_int<int>(value, key);
    } else if (key == "m_max") {
      p.m_max = parse_int<int>(value, key);
    } else if (key == "reps") {
      p.reps = parse_int<std::size_t>(value, key);
    } else if (key == "proposal") {
      p.proposal = std::string(value);
    } else if (key == "seed") {
      p.seed = parse_int<std::uint64_t>(value, key);
    } else if (key == "output") {
      p.output = std::string(value);
    } else if (key == "randomization") {
      try {
        p.randomization = parse_randomization(value);
      } catch (const Error& e) {
        throw ValidationError(e.what());
      }
    } else if (key == "window") {
      p.window = parse_range(value, key);
    } else if (key == "radius") {
      p.radius = parse_double(value, key);
    } else if (key == "radius_scale") {
      p.radius_scale = parse_double(value, key);
    } else if (key == "eps") {
      p.eps = parse_double(value, key);
    } else if (key == "timing") {
      p.timing = parse_bool(value, key);
    } else {
      throw ValidationError("plan line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  return p;
}

ExperimentPlan ExperimentPlan::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open plan file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string ExperimentPlan::to_text() const {
  std::ostringstream os;
  os << "integrand = " << integrand << '\n'
     << "d = " << d << '\n'
     << "M = " << fmt(M) << '\n'
     << "methods = ";
  for (std::size_t i = 0; i < methods.size(); ++i) {
    os << (i ? "," : "") << to_string(methods[i]);
  }
  os << '\n'
     << "m = " << m_min << ".." << m_max << '\n'
     << "reps = " << reps << '\n'
     << "proposal = " << proposal << '\n'
     << "seed = " << seed << '\n';
  if (!output.empty()) os << "output = " << output << '\n';
  os << "randomization = " << to_string(randomization) << '\n';
  if (window) os << "window = " << window->first << ".." << window->second << '\n';
  if (radius) os << "radius = " << fmt(*radius) << '\n';
  os << "radius_scale = " << fmt(radius_scale) << '\n'
     << "eps = " << fmt(eps) << '\n'
     << "timing = " << (timing ? "true" : "false") << '\n';
  return os.str();
}

TestIntegrand ExperimentPlan::build_integrand() const {
  try {
    return make_named_integrand(integrand, d, M);
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& e) {
    throw ValidationError(std::string("integrand: ") + e.what());
  }
}

DistributionSpec ExperimentPlan::build_proposal() const {
  try {
    DistributionSpec g = parse_distribution(proposal, d);
    check_is_proposal(g);
    return g;
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& e) {
    throw ValidationError(std::string("proposal: ") + e.what());
  }
}

std::pair<int, int> ExperimentPlan::slope_window() const {
  if (window) return *window;
  return {std::max(8, m_min + 2), m_max};
}

void ExperimentPlan::validate() const {
  if (methods.empty()) throw ValidationError("plan lists no methods");
  for (std::size_t i = 0; i < methods.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (methods[i] == methods[j]) {
        throw ValidationError("method " + to_string(methods[i]) + " listed twice");
      }
    }
  }
  if (m_min < 1 || m_max > kMaxSobolLog2 || m_min > m_max) {
    throw ValidationError("m-range must satisfy 1 <= m_min <= m_max <= " +
                          std::to_string(kMaxSobolLog2));
  }
  if (reps < 2) throw ValidationError("RMSE needs reps >= 2");
  if (d == 0) throw ValidationError("d must be positive");
  const bool any_net = std::any_of(methods.begin(), methods.end(), uses_net);
  if (any_net && d > static_cast<std::size_t>(kMaxSobolDim)) {
    throw ValidationError("Sobol' points support d <= " + std::to_string(kMaxSobolDim));
  }
  if (!(eps > 0.0) || !(radius_scale > 0.0)) {
    throw ValidationError("eps and radius_scale must be positive");
  }
  if (radius && !(*radius > eps)) throw ValidationError("radius must exceed eps");
  const TestIntegrand h = build_integrand();
  (void)build_proposal();
  if (h.growth && classify(*h.growth) == Classification::divergent_risk) {
    throw ValidationError("integrand class " + h.growth->to_string() +
                          " is divergent-risk; no method in this library has a usable rate");
  }
  for (Method m : methods) {
    if (m == Method::qmc) {
      throw ValidationError(
          "qmc evaluates the unrandomized Sobol' point 0, which maps to -inf; use rqmc or pqmc");
    }
    if ((m == Method::rqmc || m == Method::is_rqmc) && randomization == Randomization::none) {
      throw ValidationError(to_string(m) + " needs randomization = owen-scramble or digital-shift");
    }
    try {
      resolve_radius(*this, m, m_min);
    } catch (const ValidationError&) {
      throw;
    } catch (const Error& e) {
      throw ValidationError("radius for " + to_string(m) + ": " + e.what());
    }
  }
  if (!h.expectation && d > 2) {
    throw ValidationError("no known expectation for '" + integrand +
                          "' and quadrature truth is limited to d <= 2");
  }
  const auto [w_lo, w_hi] = slope_window();
  if (w_lo < m_min || w_hi > m_max || w_hi - w_lo < 3) {
    throw ValidationError("slope window " + std::to_string(w_lo) + ".." + std::to_string(w_hi) +
                          " must hold at least 4 m values inside the m-range" +
                          (window ? "" : "; widen m or set window"));
  }
}

std::optional<double> resolve_radius(const ExperimentPlan& plan, Method method, int m) {
  if (!uses_projection(method) && method != Method::is_rqmc) return std::nullopt;
  if (plan.radius) return plan.radius;
  const TestIntegrand h = plan.build_integrand();
  const GrowthClass g = h.growth ? *h.growth : GrowthClass::poly(1.0, 1.0, 1.0);
  return radius_schedule(default_rule(method, g), std::ldexp(1.0, m), schedule_rate(g),
                         plan.radius_scale);
}

double plan_truth(const ExperimentPlan& plan) {
  const TestIntegrand h = plan.build_integrand();
  if (h.expectation) return *h.expectation;
  if (plan.d > 2) {
    throw ValidationError("quadrature truth is limited to d <= 2");
  }
  return quad_expectation(h.eval, DistributionSpec::standard_normal(plan.d));
}

std::uint64_t row_seed(std::uint64_t master, Method method, int m) {
  return derive_key(master, {static_cast<std::uint64_t>(method), static_cast<std::uint64_t>(m)});
}

ExperimentResult run_convergence(const ExperimentPlan& plan, int threads) {
  return sweep(plan, true, threads);
}

ExperimentResult run_convergence_reference(const ExperimentPlan& plan) {
  return sweep(plan, false, 1);
}

void write_result_csv(std::ostream& os, const ExperimentResult& result) {
  os << kResultHeader << '\n';
  for (const ResultRow& r : result.rows) {
    char wall[32];
    std::snprintf(wall, sizeof wall, "%.3f", r.wall_time_ms);
    os << to_string(r.method) << ',' << r.d << ',' << fmt(r.M) << ',' << fmt(r.nu) << ','
       << r.m << ',' << r.n << ',' << r.reps << ',' << fmt(r.rmse) << ','
       << fmt(r.mean_estimate) << ',' << (r.R_used ? fmt(*r.R_used) : "") << ','
       << r.seed << ',' << wall << '\n';
  }
}

ExperimentResult read_result_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ValidationError("result CSV is empty");
  if (trim(line) != kResultHeader) {
    throw ValidationError("result CSV header mismatch: got '" + std::string(trim(line)) +
                          "', expected '" + std::string(kResultHeader) + "'");
  }
  ExperimentResult result;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(trim(line), ',');
    if (f.size() != 12) {
      throw ValidationError("result CSV line " + std::to_string(line_no) + ": expected 12 fields");
    }
    ResultRow r;
    r.method = parse_method(trim(f[0]));
    r.d = parse_int<std::size_t>(f[1], "d");
    r.M = parse_double(f[2], "M");
    r.nu = parse_double(f[3], "nu");
    r.m = parse_int<int>(f[4], "m");
    r.n = parse_int<std::size_t>(f[5], "n");
    r.reps = parse_int<std::size_t>(f[6], "reps");
    r.rmse = parse_double(f[7], "rmse");
    r.mean_estimate = parse_double(f[8], "mean_estimate");
    if (!trim(f[9]).empty()) r.R_used = parse_double(f[9], "R_used");
    r.seed = parse_int<std::uint64_t>(f[10], "seed");
    r.wall_time_ms = parse_double(f[11], "wall_time_ms");
    result.rows.push_back(r);
  }
  return result;
}

std::string git_hash() { return PQMC_GIT_HASH; }

std::string result_metadata_json(const ExperimentPlan& plan, const ExperimentResult& result) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["git_hash"] = git_hash();
  j["columns"] = split(kResultHeader, ',');
  j["rows"] = result.rows.size();
  j["truth"] = result.truth;
  nlohmann::ordered_json echo;
  const std::string text = plan.to_text();  // split() returns views into it
  for (std::string_view line : split(text, '\n')) {
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) continue;
    echo[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
  }
  j["plan"] = echo;
  return j.dump(2) + "\n";
}

void save_result(const std::string& path, const ExperimentPlan& plan,
                 const ExperimentResult& result) {
  std::ofstream csv(path);
  if (!csv) throw ValidationError("cannot write '" + path + "'");
  write_result_csv(csv, result);
  std::ofstream meta(path + ".json");
  if (!meta) throw ValidationError("cannot write '" + path + ".json'");
  meta << result_metadata_json(plan, result);
}

std::vector<MethodSlope> report(const ExperimentResult& result, std::pair<int, int> window) {
  if (result.rows.empty()) throw ValidationError("no result rows to report");
  std::vector<Method> order;
  for (const auto& r : result.rows) {
    if (std::find(order.begin(), order.end(), r.method) == order.end()) {
      order.push_back(r.method);
    }
  }
  std::vector<MethodSlope> out;
  for (Method method : order) {
    std::vector<const ResultRow*> rows;
    for (const auto& r : result.rows) {
      if (r.method == method && r.m >= window.first && r.m <= window.second) rows.push_back(&r);
    }
    std::sort(rows.begin(), rows.end(),
              [](const ResultRow* a, const ResultRow* b) { return a->m < b->m; });
    if (rows.size() < 4) {
      throw ValidationError("window " + std::to_string(window.first) + ".." +
                            std::to_string(window.second) + " holds fewer than 4 rows for " +
                            to_string(method));
    }
    MethodSlope s;
    s.method = method;
    s.first_m = rows.front()->m;
    s.last_m = rows.back()->m;
    std::vector<double> x;
    std::vector<double> y;
    for (const ResultRow* r : rows) {
      if (r->rmse > 0.0) {
        x.push_back(std::log2(static_cast<double>(r->n)));
        y.push_back(std::log2(r->rmse));
      }
    }
    if (x.empty()) {
      s.exact = true;
    } else {
      if (x.size() < 4) {
        throw ValidationError("fewer than 4 nonzero RMSE rows for " + to_string(method));
      }
      s.fit = slope_fit(x, y);
      s.unstable = s.fit.residual_rms > kUnstableResidual;
    }
    out.push_back(s);
  }
  return out;
}

namespace {
std::string status(const MethodSlope& s) {
  if (s.exact) return "exact";
  return s.unstable ? "unstable" : "ok";
}
}  // namespace

void write_report_table(std::ostream& os, const std::vector<MethodSlope>& slopes) {
  os << std::left << std::setw(10) << "method" << std::setw(10) << "window" << std::right
     << std::setw(10) << "slope" << std::setw(12) << "resid_rms" << "  status\n";
  for (const auto& s : slopes) {
    std::ostringstream w;
    w << s.first_m << ".." << s.last_m;
    os << std::left << std::setw(10) << to_string(s.method) << std::setw(10) << w.str()
       << std::right << std::fixed << std::setprecision(4) << std::setw(10)
       << (s.exact ? 0.0 : s.fit.slope) << std::setw(12) << s.fit.residual_rms << "  "
       << status(s) << '\n';
    os.unsetf(std::ios::floatfield);
  }
}

void write_report_csv(std::ostream& os, const std::vector<MethodSlope>& slopes) {
  os << "method,first_m,last_m,slope,intercept,residual_rms,points,status\n";
  for (const auto& s : slopes) {
    os << to_string(s.method) << ',' << s.first_m << ',' << s.last_m << ','
       << (s.exact ? "" : fmt(s.fit.slope)) << ',' << (s.exact ? "" : fmt(s.fit.intercept))
       << ',' << (s.exact ? "" : fmt(s.fit.residual_rms)) << ',' << s.fit.points << ','
       << status(s) << '\n';
  }
}

}  // namespace pqmc
