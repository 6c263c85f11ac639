#include "pqmc/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <ostream>
#include <utility>

#include "pqmc/errors.hpp"

namespace pqmc {

namespace {

constexpr int kPanelOrder = 20;
constexpr double kMaxTruncation = 60.0;

struct Rule {
  std::vector<double> x;
  std::vector<double> w;
};

// Gauss-Legendre nodes/weights on [-1, 1] (Newton on P_n).
const Rule& legendre_panel() {
  static const Rule rule = [] {
    Rule r;
    const int n = kPanelOrder;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
      double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double pp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p1 = 1.0;
        double p2 = 0.0;
        for (int j = 1; j <= n; ++j) {
          const double p3 = p2;
          p2 = p1;
          p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
        }
        pp = n * (z * p1 - p2) / (z * z - 1.0);
        const double z1 = z;
        z = z1 - p1 / pp;
        if (std::fabs(z - z1) < 1e-15) break;
      }
      r.x[i] = -z;
      r.x[n - 1 - i] = z;
      r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
    return r;
  }();
  return rule;
}

// Composite Gauss-Legendre on [a, b] with panel edges at the breakpoints.
Rule composite(double a, double b, std::vector<double> breaks, std::size_t nodes) {
  breaks.erase(std::remove_if(breaks.begin(), breaks.end(),
                              [&](double v) { return !(v > a && v < b); }),
               breaks.end());
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  std::vector<double> edges{a};
  edges.insert(edges.end(), breaks.begin(), breaks.end());
  edges.push_back(b);
  const std::size_t total_panels =
      std::max<std::size_t>(edges.size() - 1, (nodes + kPanelOrder - 1) / kPanelOrder);
  const Rule& p = legendre_panel();
  Rule out;
  for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
    const double lo = edges[s];
    const double hi = edges[s + 1];
    const auto panels = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(total_panels * (hi - lo) / (b - a))));
    const double width = (hi - lo) / static_cast<double>(panels);
    for (std::size_t k = 0; k < panels; ++k) {
      const double c = lo + (k + 0.5) * width;
      for (int i = 0; i < kPanelOrder; ++i) {
        out.x.push_back(c + 0.5 * width * p.x[i]);
        out.w.push_back(0.5 * width * p.w[i]);
      }
    }
  }
  return out;
}

double log_t_norm(double nu) {
  return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
         0.5 * std::log(nu * std::numbers::pi);
}

// Log density of one marginal, computed here rather than through the
// distribution module.
double marginal_log_density(const Marginal& m, double x) {
  if (m.family() == Family::normal) {
    return -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi);
  }
  const double nu = m.nu();
  return log_t_norm(nu) - 0.5 * (nu + 1.0) * std::log1p(x * x / nu);
}

// Axis rule with the marginal density folded into the weights.
Rule axis_rule(const Marginal& m, std::size_t nodes, double truncation,
               const std::vector<double>& breakpoints) {
  if (m.family() == Family::normal) {
    Rule r = composite(-truncation, truncation, breakpoints, nodes);
    for (std::size_t i = 0; i < r.x.size(); ++i) {
      r.w[i] *= std::exp(marginal_log_density(m, r.x[i]));
    }
    return r;
  }
  const double nu = m.nu();
  const double s = std::sqrt(nu);
  std::vector<double> theta_breaks;
  for (double b : breakpoints) theta_breaks.push_back(std::atan(b / s));
  const double h = 0.5 * std::numbers::pi;
  Rule r = composite(-h, h, theta_breaks, nodes);
  const double log_k = log_t_norm(nu) + std::log(s);
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    const double th = r.x[i];
    const double c = std::cos(th);
    r.w[i] *= std::exp(log_k + (nu - 1.0) * std::log(c));
    r.x[i] = s * std::tan(th);
  }
  return r;
}

// Neumaier-compensated sum.
struct Sum {
  double s = 0.0;
  double c = 0.0;
  void add(double v) {
    const double t = s + v;
    if (std::fabs(s) >= std::fabs(v)) c += (s - t) + v;
    else c += (v - t) + s;
    s = t;
  }
  [[nodiscard]] double value() const { return s + c; }
};

double tensor_integral(const Evaluator& f, const std::vector<Rule>& axes) {
  Sum sum;
  if (axes.size() == 1) {
    double x[1];
    for (std::size_t i = 0; i < axes[0].x.size(); ++i) {
      x[0] = axes[0].x[i];
      sum.add(axes[0].w[i] * f(std::span<const double>(x, 1)));
    }
    return sum.value();
  }
  double x[2];
  for (std::size_t i = 0; i < axes[0].x.size(); ++i) {
    x[0] = axes[0].x[i];
    Sum inner;
    for (std::size_t j = 0; j < axes[1].x.size(); ++j) {
      x[1] = axes[1].x[j];
      inner.add(axes[1].w[j] * f(std::span<const double>(x, 2)));
    }
    sum.add(axes[0].w[i] * inner.value());
  }
  return sum.value();
}

double expectation_at(const Evaluator& f, const DistributionSpec& g,
                      std::size_t nodes, double truncation,
                      const std::vector<double>& breaks) {
  std::vector<Rule> axes;
  for (std::size_t j = 0; j < g.dim(); ++j) {
    axes.push_back(axis_rule(g.marginal(j), nodes, truncation, breaks));
  }
  return tensor_integral(f, axes);
}

double tol_for(double tol, double v) { return tol * std::max(1.0, std::fabs(v)); }

double double_factorial(int n) {
  double r = 1.0;
  for (int i = n; i > 1; i -= 2) r *= i;
  return r;
}

void require_unit_band(const ProjectionConfig& cfg) {
  cfg.validate();
  if (cfg.eps != 1.0) {
    throw DomainError("the projection-error bounds are stated for eps = 1");
  }
}

// h_IS = phi h / g using local densities.
Evaluator weighted(const TestIntegrand& h, const DistributionSpec& g) {
  return [f = h.eval, lf = h.log_eval, g](std::span<const double> x) {
    double lr = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      lr += -0.5 * x[j] * x[j] - 0.5 * std::log(2.0 * std::numbers::pi) -
            marginal_log_density(g.marginal(j), x[j]);
    }
    return lf ? std::exp(lf(x) + lr) : f(x) * std::exp(lr);
  };
}

std::vector<double> projection_breaks(const ProjectionConfig& cfg) {
  return {-cfg.R, -cfg.R + cfg.eps, cfg.R - cfg.eps, cfg.R};
}

// Squared difference f(x) - f(P_R x).
Evaluator projection_gap_sq(Evaluator f, const ProjectionConfig& cfg) {
  return [f = std::move(f), cfg](std::span<const double> x) {
    std::array<double, 2> p{};
    for (std::size_t j = 0; j < x.size(); ++j) p[j] = project_scalar(x[j], cfg);
    const double diff = f(x) - f(std::span<const double>(p.data(), x.size()));
    return diff * diff;
  };
}

std::vector<std::vector<std::size_t>> nonempty_subsets(std::size_t d) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t mask = 1; mask < (std::size_t{1} << d); ++mask) {
    std::vector<std::size_t> u;
    for (std::size_t j = 0; j < d; ++j) {
      if (mask & (std::size_t{1} << j)) u.push_back(j);
    }
    out.push_back(u);
  }
  return out;
}

// Integral over a box (one rule per coordinate in u) of integrand(point).
template <class F>
double box_integral(const std::vector<Rule>& axes, F&& integrand) {
  Sum sum;
  std::array<double, 3> t{};
  if (axes.size() == 1) {
    for (std::size_t i = 0; i < axes[0].x.size(); ++i) {
      t[0] = axes[0].x[i];
      sum.add(axes[0].w[i] * integrand(t));
    }
  } else {
    for (std::size_t i = 0; i < axes[0].x.size(); ++i) {
      t[0] = axes[0].x[i];
      for (std::size_t j = 0; j < axes[1].x.size(); ++j) {
        t[1] = axes[1].x[j];
        sum.add(axes[0].w[i] * axes[1].w[j] * integrand(t));
      }
    }
  }
  return sum.value();
}

// Roots of t -> partial(j, t) on [lo, hi] for every axis j: |partial| has a
// kink there, so they go in as panel edges. Mixed partials of product-form
// integrands vanish on the same axis-aligned lines.
template <class Partial>
std::vector<double> sign_change_breaks(std::size_t d, double lo, double hi,
                                       Partial&& partial) {
  constexpr int kScan = 2000;
  std::vector<double> out;
  for (std::size_t j = 0; j < d; ++j) {
    double t0 = lo;
    double v0 = partial(j, t0);
    for (int i = 1; i <= kScan; ++i) {
      const double t1 = lo + (hi - lo) * i / kScan;
      const double v1 = partial(j, t1);
      if ((v0 < 0.0 && v1 > 0.0) || (v0 > 0.0 && v1 < 0.0)) {
        double a = t0;
        double b = t1;
        double va = v0;
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (a + b);
          const double vm = partial(j, mid);
          if ((vm < 0.0) == (va < 0.0)) {
            a = mid;
            va = vm;
          } else {
            b = mid;
          }
        }
        out.push_back(0.5 * (a + b));
      }
      t0 = t1;
      v0 = v1;
    }
  }
  return out;
}

void check_small_dim(std::size_t d) {
  if (d == 0 || d > 2) {
    throw UnsupportedDimension("oracle computations support d in {1, 2}");
  }
}

}  // namespace

void QuadratureSpec::validate() const {
  if (nodes < 50) throw ConfigError("quadrature needs at least 50 nodes per axis");
  if (!(truncation >= 8.0)) throw ConfigError("quadrature truncation must be >= 8");
  if (!(tolerance > 0.0)) throw ConfigError("quadrature tolerance must be positive");
}

QuadResult quad_expectation_detail(const Evaluator& f, const DistributionSpec& g,
                                   const QuadratureSpec& q) {
  q.validate();
  check_small_dim(g.dim());
  bool has_normal = false;
  for (std::size_t j = 0; j < g.dim(); ++j) {
    has_normal = has_normal || g.marginal(j).family() == Family::normal;
  }
  std::size_t n = q.nodes;
  double T = q.truncation;
  double v = expectation_at(f, g, n, T, q.breakpoints);
  double trunc_err = 0.0;
  if (has_normal) {
    for (;;) {
      const double wider = expectation_at(f, g, n, T + 2.0, q.breakpoints);
      trunc_err = std::fabs(wider - v);
      v = wider;
      T += 2.0;
      if (trunc_err <= tol_for(q.tolerance, v)) break;
      if (T > kMaxTruncation) {
        throw AccuracyError("quadrature: truncated mass does not vanish by |x| = " +
                            std::to_string(kMaxTruncation));
      }
    }
  }
  for (int level = 0; level < 3; ++level) {
    const double finer = expectation_at(f, g, 2 * n, T, q.breakpoints);
    const double node_err = std::fabs(finer - v);
    v = finer;
    n *= 2;
    if (node_err <= tol_for(q.tolerance, v)) {
      return {v, std::max(node_err, trunc_err), n, T};
    }
  }
  throw AccuracyError("quadrature: node doubling did not settle within tolerance");
}

double quad_expectation(const Evaluator& f, const DistributionSpec& g,
                        const QuadratureSpec& q) {
  return quad_expectation_detail(f, g, q).value;
}

double mixed_partial_fd(const Evaluator& f, std::span<const double> x,
                        std::span<const std::size_t> u, double h) {
  if (u.size() > 3) throw DomainError("mixed_partial_fd supports |u| <= 3");
  if (!(h > 0.0)) throw DomainError("finite-difference step must be positive");
  std::vector<double> p(x.begin(), x.end());
  const auto diff = [&](double step) {
    // Sum over the 2^|u| corners of the tensor stencil.
    double s = 0.0;
    const std::size_t corners = std::size_t{1} << u.size();
    for (std::size_t c = 0; c < corners; ++c) {
      int sign = 1;
      for (std::size_t a = 0; a < u.size(); ++a) {
        const bool plus = (c >> a) & 1u;
        p[u[a]] = x[u[a]] + (plus ? step : -step);
        if (!plus) sign = -sign;
      }
      s += sign * f(p);
    }
    for (std::size_t a : u) p[a] = x[a];
    return s / std::pow(2.0 * step, static_cast<double>(u.size()));
  };
  if (u.empty()) return f(p);
  const double coarse = diff(h);
  const double fine = diff(0.5 * h);
  return (4.0 * fine - coarse) / 3.0;
}

HkResult hk_variation_cube(const Evaluator& f, std::size_t d, std::size_t nodes) {
  check_small_dim(d);
  constexpr double h = 1e-4;
  const std::vector<double> breaks = sign_change_breaks(d, 0.0, 1.0, [&](std::size_t j, double t) {
    std::vector<double> y(d, 1.0);
    y[j] = std::clamp(t, h, 1.0 - h);
    const std::size_t u[1] = {j};
    return mixed_partial_fd(f, y, u, h);
  });
  const auto at = [&](std::size_t n) {
    const Rule r = composite(0.0, 1.0, breaks, n);
    double total = 0.0;
    for (const auto& u : nonempty_subsets(d)) {
      std::vector<Rule> axes(u.size(), r);
      std::vector<double> y(d, 1.0);
      total += box_integral(axes, [&](const std::array<double, 3>& t) {
        for (std::size_t a = 0; a < u.size(); ++a) {
          y[u[a]] = std::clamp(t[a], h, 1.0 - h);
        }
        return std::fabs(mixed_partial_fd(f, y, u, h));
      });
    }
    return total;
  };
  const double coarse = at(nodes);
  const double fine = at(2 * nodes);
  const double err = std::fabs(fine - coarse);
  if (err > 1e-6 * std::max(1.0, std::fabs(fine))) {
    throw AccuracyError("HK variation unstable under refinement (non-smooth input?)");
  }
  return {fine, err};
}

HkResult hk_variation_transported(const Evaluator& f, std::size_t d,
                                  const ProjectionConfig& cfg, std::size_t nodes) {
  check_small_dim(d);
  cfg.validate();
  const double anchor = cfg.R - 0.5 * cfg.eps;  // P_R(+inf)
  std::vector<double> breaks = sign_change_breaks(d, -cfg.R, cfg.R, [&](std::size_t j, double t) {
    std::vector<double> z(d, anchor);
    z[j] = project_scalar(t, cfg);
    const std::size_t u[1] = {j};
    return mixed_partial_fd(f, z, u);
  });
  breaks.insert(breaks.end(), {-cfg.R + cfg.eps, 0.0, cfg.R - cfg.eps});
  const auto at = [&](std::size_t n) {
    const Rule r = composite(-cfg.R, cfg.R, breaks, n);
    double total = 0.0;
    for (const auto& u : nonempty_subsets(d)) {
      std::vector<Rule> axes(u.size(), r);
      std::vector<double> z(d, anchor);
      total += box_integral(axes, [&](const std::array<double, 3>& t) {
        double jac = 1.0;
        for (std::size_t a = 0; a < u.size(); ++a) {
          z[u[a]] = project_scalar(t[a], cfg);
          jac *= project_derivative(t[a], cfg);
        }
        if (jac == 0.0) return 0.0;
        return std::fabs(mixed_partial_fd(f, z, u) * jac);
      });
    }
    return total;
  };
  const double coarse = at(nodes);
  const double fine = at(2 * nodes);
  const double err = std::fabs(fine - coarse);
  if (err > 1e-6 * std::max(1.0, std::fabs(fine))) {
    throw AccuracyError("HK variation unstable under refinement (non-smooth input?)");
  }
  return {fine, err};
}

// ---------------------------------------------------------------------------

BoundReport projection_error_sq(const TestIntegrand& h, const ProjectionConfig& cfg) {
  require_unit_band(cfg);
  if (!h.growth) throw DomainError("integrand '" + h.name + "' declares no class");
  const GrowthClass& g = *h.growth;
  const std::size_t d = h.dim;
  check_small_dim(d);
  const double R = cfg.R;
  const double dd = static_cast<double>(d);
  BoundReport rep{"", h.name, d, R, g.M, g.B, g.k, 0.0, 0.0, false};
  if (g.kind == GrowthKind::polynomial) {
    if (!(R > 2.0)) throw DomainError("polynomial projection bound needs R > 2");
    const int k2 = static_cast<int>(std::floor(2.0 * g.k));
    const double C1 = std::pow(std::numbers::pi / 2.0, dd / 2.0 - 1.0) *
                      (g.M * g.M + g.B * g.B) * double_factorial(k2 + static_cast<int>(d) + 2);
    rep.lemma = "proj-poly";
    rep.rhs = C1 * std::pow(R - 1.0, k2 + dd - 1.0) * std::exp(-0.5 * (R - 1.0) * (R - 1.0));
  } else {
    if (!(g.k < 2.0)) {
      throw DomainError("exponential projection bound needs order k < 2");
    }
    if (!(R > 1.0 + std::numbers::sqrt2)) {
      throw DomainError("exponential projection bound needs R > 1 + sqrt(2)");
    }
    const double C2 = std::pow(std::numbers::pi / 2.0, dd / 2.0 - 1.0) * g.B * g.B *
                      std::exp(std::pow(4.0 * g.k * g.M, g.k / (2.0 - g.k))) *
                      double_factorial(static_cast<int>(d) + 2);
    rep.lemma = "proj-exp";
    rep.rhs = C2 * std::pow(R - 1.0, dd - 1.0) * std::exp(-0.25 * (R - 1.0) * (R - 1.0));
  }
  QuadratureSpec q;
  q.breakpoints = projection_breaks(cfg);
  rep.lhs = quad_expectation(projection_gap_sq(h.eval, cfg),
                             DistributionSpec::standard_normal(d), q);
  rep.pass = rep.lhs <= rep.rhs;
  return rep;
}

BoundReport hk_variation_bound(const TestIntegrand& h, const ProjectionConfig& cfg) {
  if (!h.growth) throw DomainError("integrand '" + h.name + "' declares no class");
  const GrowthClass& g = *h.growth;
  const std::size_t d = h.dim;
  const double dd = static_cast<double>(d);
  const double R = cfg.R;
  BoundReport rep{"", h.name, d, R, g.M, g.B, g.k, 0.0, 0.0, false};
  const double four_d = std::pow(4.0, dd);
  if (g.kind == GrowthKind::polynomial) {
    rep.lemma = "hk-poly";
    rep.rhs = four_d * (g.M * std::pow(dd, g.k / 2.0) * std::pow(R, g.k + dd) +
                        g.B * std::pow(R, dd));
  } else {
    rep.lemma = "hk-exp";
    rep.rhs = four_d * g.B * std::pow(R, dd) * std::exp(g.M * std::pow(std::sqrt(dd) * R, g.k));
  }
  rep.lhs = hk_variation_transported(h.eval, d, cfg).value;
  rep.pass = rep.lhs <= rep.rhs;
  return rep;
}

GrowthClass certify_is_ratio(double M, double C, const DistributionSpec& g,
                             double slack) {
  if (!(M > 0.0) || !(slack > 0.0) || !(M + slack < 0.5)) {
    throw DomainError("IS ratio certificate needs M > 0, slack > 0, M + slack < 1/2");
  }
  double log_b = std::log(C);
  for (std::size_t j = 0; j < g.dim(); ++j) {
    const Marginal& m = g.marginal(j);
    if (m.family() != Family::student_t) {
      throw DomainError("h/g leaves every G_e(M', B, 2) with M' < 1/2 for a normal marginal");
    }
    const double nu = m.nu();
    // e^{-slack x^2} / g(x) peaks near x^2 = (nu + 1) / (2 slack); the
    // derivative factor adds one power of x.
    const double x_max = 4.0 * std::sqrt((nu + 3.0) / (2.0 * slack)) + 10.0;
    constexpr int steps = 200000;
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= steps; ++i) {
      const double x = x_max * i / steps;
      const double factor = std::max(
          1.0, std::fabs(2.0 * M * x + (nu + 1.0) * x / (nu + x * x)));
      best = std::max(best, std::log(factor) - slack * x * x -
                                marginal_log_density(m, x));
    }
    log_b += best;
  }
  return GrowthClass::expo(M + slack, 1.05 * std::exp(log_b), 2.0);
}

double is_derivative_constant(double M, double B, std::size_t d) {
  if (!(M < 0.5)) throw DomainError("derivative constant needs M < 1/2");
  const double a = 0.5 - M;
  double best = B;
  for (std::size_t j = 1; j <= d; ++j) {
    const double jj = static_cast<double>(j);
    const double r2 = jj / (2.0 * a);
    best = std::max(best, std::pow(2.0, jj) * B * std::pow(r2, jj / 2.0) * std::exp(-a * r2));
  }
  return best;
}

BoundReport is_projection_error_sq(const TestIntegrand& h, const DistributionSpec& g,
                                   const ProjectionConfig& cfg,
                                   const GrowthClass& ratio) {
  require_unit_band(cfg);
  const std::size_t d = h.dim;
  check_small_dim(d);
  if (g.dim() != d) throw DomainError("proposal dimension mismatch");
  if (ratio.kind != GrowthKind::exponential || ratio.k != 2.0 || !(ratio.M < 0.5)) {
    throw DomainError("IS bounds need h/g in G_e(M, B, 2) with M < 1/2");
  }
  const double R = cfg.R;
  if (!(R >= 1.0 + 1.0 / std::sqrt(1.0 - 2.0 * ratio.M))) {
    throw DomainError("IS projection bound needs R >= 1 + 1/sqrt(1 - 2M)");
  }
  const double A = g.second_moment();
  BoundReport rep{"is-mse", h.name, d, R, ratio.M, ratio.B, 2.0, 0.0, 0.0, false};
  rep.rhs = 16.0 * A * ratio.B * ratio.B * static_cast<double>(d) * (R - 1.0) * (R - 1.0) *
            std::exp(-(1.0 - 2.0 * ratio.M) * (R - 1.0) * (R - 1.0));
  QuadratureSpec q;
  q.breakpoints = projection_breaks(cfg);
  rep.lhs = quad_expectation(projection_gap_sq(weighted(h, g), cfg), g, q);
  rep.pass = rep.lhs <= rep.rhs;
  return rep;
}

BoundReport is_hk_variation_bound(const TestIntegrand& h, const DistributionSpec& g,
                                  const ProjectionConfig& cfg,
                                  const GrowthClass& ratio) {
  const std::size_t d = h.dim;
  if (g.dim() != d) throw DomainError("proposal dimension mismatch");
  const double dd = static_cast<double>(d);
  BoundReport rep{"is-hk", h.name, d, cfg.R, ratio.M, ratio.B, ratio.k, 0.0, 0.0, false};
  rep.rhs = is_derivative_constant(ratio.M, ratio.B, d) * std::pow(4.0, dd) *
            std::pow(cfg.R, dd);
  rep.lhs = hk_variation_transported(weighted(h, g), d, cfg).value;
  rep.pass = rep.lhs <= rep.rhs;
  return rep;
}

BoundReport is_derivative_bound(const TestIntegrand& h, const DistributionSpec& g,
                                const GrowthClass& ratio, double x_max,
                                std::size_t points) {
  if (h.dim != 1 || g.dim() != 1) {
    throw UnsupportedDimension("pointwise derivative check is one-dimensional");
  }
  if (points < 2) throw DomainError("need at least two grid points");
  const double a = 0.5 - ratio.M;
  const Evaluator w = weighted(h, g);
  const std::array<std::size_t, 1> u{0};
  double worst = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double x = -x_max + 2.0 * x_max * static_cast<double>(i) /
                                   static_cast<double>(points - 1);
    const double env = ratio.B * std::exp(-a * x * x);
    const double p[1] = {x};
    worst = std::max(worst, std::fabs(w(std::span<const double>(p, 1))) / env);
    if (x != 0.0) {
      const double dv = mixed_partial_fd(w, std::span<const double>(p, 1), u);
      worst = std::max(worst, std::fabs(dv) / (2.0 * std::fabs(x) * env));
    }
  }
  return {"is-deriv", h.name, 1, 0.0, ratio.M, ratio.B, ratio.k, worst, 1.0, worst <= 1.0};
}

std::vector<BoundReport> run_lemma_suite(const LemmaSuiteOptions& opts) {
  std::vector<BoundReport> out;
  for (std::size_t d : opts.dims) {
    const DistributionSpec t = DistributionSpec::student_t(d, opts.nu);
    std::vector<TestIntegrand> plain{make_linear(d), make_quadratic(d),
                                     make_exp_linear(0.5, d)};
    for (double R : opts.radii) {
      const ProjectionConfig cfg(R, 1.0);
      for (const auto& h : plain) {
        out.push_back(projection_error_sq(h, cfg));
        out.push_back(hk_variation_bound(h, cfg));
      }
      for (double M : opts.rates) {
        const TestIntegrand h = make_paper_test_function(M, d);
        out.push_back(hk_variation_bound(h, cfg));
        const GrowthClass ratio = certify_is_ratio(M, h.growth->B, t, opts.slack);
        out.push_back(is_projection_error_sq(h, t, cfg, ratio));
        out.push_back(is_hk_variation_bound(h, t, cfg, ratio));
      }
    }
  }
  return out;
}

void write_bound_reports(std::ostream& os, const std::vector<BoundReport>& reports) {
  os << "lemma,d,R,M,B,k,lhs,rhs,pass\n";
  const auto prec = os.precision(17);
  for (const auto& r : reports) {
    std::string label = r.lemma + "/" + r.integrand;
    std::replace(label.begin(), label.end(), ',', ';');
    os << label << ',' << r.d << ',' << r.R << ',' << r.M << ',' << r.B << ','
       << r.k << ',' << r.lhs << ',' << r.rhs << ',' << (r.pass ? "true" : "false")
       << '\n';
  }
  os.precision(prec);
}

SlopeFit slope_fit(std::span<const double> x, std::span<const double> y,
                   std::size_t first, std::size_t last) {
  if (x.size() != y.size()) throw DomainError("slope_fit: length mismatch");
  if (x.empty()) throw DomainError("slope_fit: no data");
  last = std::min(last, x.size() - 1);
  if (first > last || last - first + 1 < 4) {
    throw DomainError("slope_fit needs at least 4 points in the window");
  }
  const std::size_t n = last - first + 1;
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = first; i <= last; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = first; i <= last; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("slope_fit: degenerate abscissae");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = first; i <= last; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss += r * r;
  }
  fit.residual_rms = std::sqrt(ss / static_cast<double>(n));
  fit.points = n;
  return fit;
}

double ks_uniform_pvalue(std::vector<double> samples) {
  if (samples.empty()) throw DomainError("KS test needs samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double D = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double u = samples[i];
    D = std::max({D, (i + 1.0) / n - u, u - static_cast<double>(i) / n});
  }
  const double sn = std::sqrt(n);
  const double lambda = (sn + 0.12 + 0.11 / sn) * D;
  if (lambda < 0.2) return 1.0;
  double q = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    q += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(q, 0.0, 1.0);
}

}  // namespace pqmc
