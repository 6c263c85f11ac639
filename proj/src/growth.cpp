#include "pqmc/growth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>

#include "pqmc/errors.hpp"

namespace pqmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Beyond this radius the geometric certification grid becomes meaningless
// (r^k overflows the interesting range for every k we accept).
constexpr double kMaxCertRadius = 1e12;

GrowthClass checked(GrowthClass g) {
  g.validate();
  return g;
}

// max over the certification grid of L(r), where L is known to be
// non-increasing for r >= r_c.
template <class F>
double grid_sup(F&& L, double r_c) {
  if (!(r_c <= kMaxCertRadius)) {
    throw DomainError("growth certificate needs radius beyond " +
                      std::to_string(kMaxCertRadius) +
                      "; increase the slack");
  }
  double best = -kInf;
  for (double r : certification_grid(std::max(8.0, 2.0 * r_c))) {
    best = std::max(best, L(r));
  }
  return best;
}

// log(exp(a) + exp(b)) without overflow.
double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -kInf) return a;
  return a + std::log1p(std::exp(b - a));
}

double log_poly(double M, double B, double k, double r) {
  if (r == 0.0) return std::log(B);
  return log_add(std::log(M) + k * std::log(r), std::log(B));
}

// factor * exp(L) for a certified constant; DomainError when it does not fit
// in a double (nearly equal orders need an enormous balance radius).
double certified(double factor, double L) {
  const double log_v = std::log(factor) + L;
  if (!(log_v < std::log(std::numeric_limits<double>::max()))) {
    throw DomainError("certified growth constant exp(" + std::to_string(log_v) +
                      ") overflows; the orders are too close for the algebra slack");
  }
  return factor * std::exp(L);
}

// Operands in a fixed order so add/mul are symmetric bit for bit.
std::pair<const GrowthClass&, const GrowthClass&> canonical(const GrowthClass& a,
                                                            const GrowthClass& b) {
  const auto key = [](const GrowthClass& g) { return std::tuple(g.kind, g.k, g.M, g.B); };
  if (key(b) < key(a)) return {b, a};
  return {a, b};
}

// argmax of a r^p - b r^q for q > p > 0.
double balance_radius(double a, double p, double b, double q) {
  return std::pow(a * p / (b * q), 1.0 / (q - p));
}

}  // namespace

GrowthClass GrowthClass::poly(double M, double B, double k) {
  return checked(GrowthClass{GrowthKind::polynomial, M, B, k});
}

GrowthClass GrowthClass::expo(double M, double B, double k) {
  return checked(GrowthClass{GrowthKind::exponential, M, B, k});
}

void GrowthClass::validate() const {
  const auto ok = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!ok(M) || !ok(B) || !ok(k)) {
    throw DomainError("growth class needs finite positive M, B, k: " +
                      to_string());
  }
}

double GrowthClass::bound(double r) const {
  if (kind == GrowthKind::polynomial) return M * std::pow(r, k) + B;
  return B * std::exp(M * std::pow(r, k));
}

double GrowthClass::log_bound(double r) const {
  if (kind == GrowthKind::polynomial) return log_poly(M, B, k, r);
  return std::log(B) + M * std::pow(r, k);
}

std::string GrowthClass::to_string() const {
  std::ostringstream os;
  os.precision(10);
  os << (kind == GrowthKind::polynomial ? "Gp(" : "Ge(") << M << "," << B
     << "," << k << ")";
  return os.str();
}

std::vector<double> certification_grid(double r_max) {
  std::vector<double> r;
  r.reserve(801);
  for (int i = 0; i <= 800; ++i) r.push_back(8.0 * i / 800.0);
  if (r_max > 8.0) {
    constexpr double ratio = 1.002;
    double v = 8.0;
    while (v < r_max) {
      v = std::min(v * ratio, r_max);
      r.push_back(v);
    }
  }
  return r;
}

GrowthClass scale_class(double c, const GrowthClass& g) {
  g.validate();
  if (c == 0.0 || !std::isfinite(c)) {
    throw DomainError("scaling a growth class by zero gives a degenerate class");
  }
  const double a = std::fabs(c);
  if (g.kind == GrowthKind::polynomial) return GrowthClass::poly(a * g.M, a * g.B, g.k);
  return GrowthClass::expo(g.M, a * g.B, g.k);
}

GrowthClass add_classes(const GrowthClass& x, const GrowthClass& y,
                        const AlgebraOptions& opts) {
  x.validate();
  y.validate();
  const auto [g1, g2] = canonical(x, y);
  using K = GrowthKind;
  if (g1.kind == K::polynomial && g2.kind == K::polynomial) {
    const double k = std::max(g1.k, g2.k);
    const double M = g1.M + g2.M;
    if (g1.k == g2.k) return GrowthClass::poly(M, g1.B + g2.B, k);
    // For r >= 1 the lower power is dominated, so only [0,1] matters.
    const double excess = grid_sup(
        [&](double r) { return g1.bound(r) + g2.bound(r) - M * std::pow(r, k); },
        1.0);
    return GrowthClass::poly(M, opts.safety * excess, k);
  }
  if (g1.kind == K::exponential && g2.kind == K::exponential) {
    if (g1.k == g2.k) {
      return GrowthClass::expo(std::max(g1.M, g2.M), g1.B + g2.B, g1.k);
    }
    const GrowthClass& a = g1.k > g2.k ? g1 : g2;
    const GrowthClass& b = g1.k > g2.k ? g2 : g1;
    const double r_c = balance_radius(b.M, b.k, a.M, a.k);
    const double L = grid_sup(
        [&](double r) {
          return log_add(std::log(a.B), std::log(b.B) + b.M * std::pow(r, b.k) -
                                            a.M * std::pow(r, a.k));
        },
        r_c);
    return GrowthClass::expo(a.M, certified(opts.safety, L), a.k);
  }
  const GrowthClass& e = g1.kind == K::exponential ? g1 : g2;
  const GrowthClass& p = g1.kind == K::exponential ? g2 : g1;
  const double r_c = std::pow(p.k / (e.M * e.k), 1.0 / e.k);
  const double L = grid_sup(
      [&](double r) {
        return log_add(std::log(e.B), p.log_bound(r) - e.M * std::pow(r, e.k));
      },
      r_c);
  return GrowthClass::expo(e.M, certified(opts.safety, L), e.k);
}

GrowthClass mul_classes(const GrowthClass& x, const GrowthClass& y,
                        const AlgebraOptions& opts) {
  x.validate();
  y.validate();
  const auto [g1, g2] = canonical(x, y);
  if (!(opts.slack > 0.0)) throw DomainError("algebra slack must be positive");
  using K = GrowthKind;
  if (g1.kind == K::polynomial && g2.kind == K::polynomial) {
    const double k = g1.k + g2.k;
    const double M = g1.M * g2.M + g1.M * g2.B + g1.B * g2.M;
    const double excess = grid_sup(
        [&](double r) { return g1.bound(r) * g2.bound(r) - M * std::pow(r, k); },
        1.0);
    return GrowthClass::poly(M, opts.safety * std::max(excess, g1.B * g2.B), k);
  }
  if (g1.kind == K::exponential && g2.kind == K::exponential) {
    if (g1.k == g2.k) return GrowthClass::expo(g1.M + g2.M, g1.B * g2.B, g1.k);
    const GrowthClass& a = g1.k > g2.k ? g1 : g2;
    const GrowthClass& b = g1.k > g2.k ? g2 : g1;
    // sup_r b.M r^b.k - slack r^a.k in closed form.
    const double r = balance_radius(b.M, b.k, opts.slack, a.k);
    const double peak = b.M * std::pow(r, b.k) - opts.slack * std::pow(r, a.k);
    return GrowthClass::expo(a.M + opts.slack, certified(a.B * b.B, peak), a.k);
  }
  const GrowthClass& e = g1.kind == K::exponential ? g1 : g2;
  const GrowthClass& p = g1.kind == K::exponential ? g2 : g1;
  const double r_c = std::pow(p.k / (opts.slack * e.k), 1.0 / e.k);
  const double L = grid_sup(
      [&](double r) {
        return std::log(e.B) + p.log_bound(r) - opts.slack * std::pow(r, e.k);
      },
      r_c);
  return GrowthClass::expo(e.M + opts.slack, certified(opts.safety, L), e.k);
}

GrowthClass compose_classes(const GrowthClass& outer, const GrowthClass& inner,
                            const AlgebraOptions& opts) {
  outer.validate();
  inner.validate();
  using K = GrowthKind;
  if (inner.kind == K::exponential) {
    if (outer.kind == K::exponential) {
      throw DomainError("composition of two exponential classes is not a growth class");
    }
    // M_o (B_i e^{M_i r^k})^k_o + B_o <= (M_o B_i^k_o + B_o) e^{k_o M_i r^k}.
    return GrowthClass::expo(outer.k * inner.M,
                             outer.M * std::pow(inner.B, outer.k) + outer.B,
                             inner.k);
  }
  const double k = outer.k * inner.k;
  // (M_i r^k_i + B_i)^k_o <= (M_i + B_i)^k_o r^k for r >= 1.
  const double M = outer.M * std::pow(inner.M + inner.B, outer.k);
  if (outer.kind == K::polynomial) {
    const double excess = grid_sup(
        [&](double r) { return outer.bound(inner.bound(r)) - M * std::pow(r, k); },
        1.0);
    return GrowthClass::poly(M, opts.safety * std::max(excess, outer.B), k);
  }
  const double L = grid_sup(
      [&](double r) {
        return std::log(outer.B) + outer.M * std::pow(inner.bound(r), outer.k) -
               M * std::pow(r, k);
      },
      1.0);
  return GrowthClass::expo(M, certified(opts.safety, L), k);
}

std::string to_string(Classification c) {
  switch (c) {
    case Classification::qmc_friendly: return "qmc-friendly";
    case Classification::fast: return "fast";
    case Classification::divergent_risk: return "divergent-risk";
  }
  return "?";
}

Classification classify(const GrowthClass& g) {
  g.validate();
  if (g.kind == GrowthKind::polynomial || g.k < 2.0) {
    return Classification::qmc_friendly;
  }
  if (g.k == 2.0 && g.M < 0.5) return Classification::fast;
  return Classification::divergent_risk;
}

double boundary_exponent(const GrowthClass& g) {
  g.validate();
  if (g.kind == GrowthKind::polynomial || g.k < 2.0) return 0.0;
  if (g.k == 2.0) return 2.0 * g.M;
  return kInf;
}

double predicted_rate(const GrowthClass& g, Method method) {
  const Classification c = classify(g);
  if (c == Classification::divergent_risk) {
    throw DomainError("no convergence rate for divergent-risk class " +
                      g.to_string());
  }
  switch (method) {
    case Method::mc:
    case Method::is_mc:
      return -0.5;
    case Method::qmc:
    case Method::rqmc:
    case Method::pqmc:
      return -1.0 + boundary_exponent(g);
    case Method::is_pqmc:
      return -1.0;
    case Method::is_rqmc:
      return -1.5;
  }
  throw DomainError("unknown method");
}

// ---------------------------------------------------------------------------

TestIntegrand make_paper_test_function(double M, std::size_t d) {
  if (!(M > 0.0 && M < 0.5)) {
    throw DomainError("test function needs 0 < M < 1/2 (expectation diverges otherwise)");
  }
  if (d == 0) throw DomainError("dimension must be positive");
  const double C = std::pow(1.0 - 2.0 * M, 0.5 * static_cast<double>(d));
  TestIntegrand h;
  std::ostringstream name;
  name << "paper(M=" << M << ",d=" << d << ")";
  h.name = name.str();
  h.dim = d;
  h.eval = [M, C](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return C * std::exp(M * s);
  };
  h.log_eval = [M, logC = std::log(C)](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return logC + M * s;
  };
  h.growth = GrowthClass::expo(M, C, 2.0);
  h.expectation = 1.0;
  h.gradient = [M, C](std::span<const double> x, std::span<double> g) {
    double s = 0.0;
    for (double v : x) s += v * v;
    const double hx = C * std::exp(M * s);
    for (std::size_t j = 0; j < x.size(); ++j) g[j] = 2.0 * M * x[j] * hx;
  };
  return h;
}

TestIntegrand make_constant(double c, std::size_t d) {
  if (d == 0) throw DomainError("dimension must be positive");
  constexpr double tiny = 1e-12;
  TestIntegrand h;
  h.name = "constant(" + std::to_string(c) + ")";
  h.dim = d;
  h.eval = [c](std::span<const double>) { return c; };
  if (c > 0.0) {
    h.log_eval = [lc = std::log(c)](std::span<const double>) { return lc; };
  }
  h.growth = GrowthClass::poly(tiny, std::max(std::fabs(c), tiny), 1.0);
  h.expectation = c;
  h.gradient = [](std::span<const double>, std::span<double> g) {
    std::fill(g.begin(), g.end(), 0.0);
  };
  return h;
}

TestIntegrand make_linear(std::size_t d) {
  if (d == 0) throw DomainError("dimension must be positive");
  TestIntegrand h;
  h.name = "linear";
  h.dim = d;
  h.eval = [](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  };
  h.growth = GrowthClass::poly(std::sqrt(static_cast<double>(d)), 1.0, 1.0);
  h.expectation = 0.0;
  h.gradient = [](std::span<const double>, std::span<double> g) {
    std::fill(g.begin(), g.end(), 1.0);
  };
  return h;
}

TestIntegrand make_quadratic(std::size_t d) {
  if (d == 0) throw DomainError("dimension must be positive");
  TestIntegrand h;
  h.name = "quadratic";
  h.dim = d;
  h.eval = [](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
  };
  h.growth = GrowthClass::poly(1.0, 1.0, 2.0);
  h.expectation = static_cast<double>(d);
  h.gradient = [](std::span<const double> x, std::span<double> g) {
    for (std::size_t j = 0; j < x.size(); ++j) g[j] = 2.0 * x[j];
  };
  return h;
}

TestIntegrand make_exp_linear(double a, std::size_t d) {
  if (!(a > 0.0 && a <= 1.0)) throw DomainError("exp-linear needs 0 < a <= 1");
  if (d == 0) throw DomainError("dimension must be positive");
  TestIntegrand h;
  std::ostringstream name;
  name << "exp-linear(a=" << a << ")";
  h.name = name.str();
  h.dim = d;
  h.eval = [a](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return std::exp(a * s);
  };
  const double dd = static_cast<double>(d);
  h.log_eval = [a](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return a * s;
  };
  h.growth = GrowthClass::expo(a * std::sqrt(dd), 1.0, 1.0);
  h.expectation = std::exp(0.5 * a * a * dd);
  h.gradient = [a](std::span<const double> x, std::span<double> g) {
    double s = 0.0;
    for (double v : x) s += v;
    const double e = a * std::exp(a * s);
    std::fill(g.begin(), g.end(), e);
  };
  return h;
}

double declared_bound_ratio(const TestIntegrand& h, double r_max,
                            std::size_t points) {
  if (!h.growth) throw DomainError("integrand '" + h.name + "' declares no class");
  if (points < 2) throw DomainError("need at least two radial points");
  const std::size_t d = h.dim;
  std::vector<std::vector<double>> dirs;
  for (std::size_t j = 0; j < d; ++j) {
    std::vector<double> e(d, 0.0);
    e[j] = 1.0;
    dirs.push_back(e);
    e[j] = -1.0;
    dirs.push_back(e);
  }
  const double s = 1.0 / std::sqrt(static_cast<double>(d));
  dirs.emplace_back(d, s);
  dirs.emplace_back(d, -s);
  double worst = 0.0;
  std::vector<double> x(d);
  for (std::size_t i = 0; i < points; ++i) {
    const double r = r_max * static_cast<double>(i) / static_cast<double>(points - 1);
    const double b = h.growth->bound(r);
    for (const auto& u : dirs) {
      for (std::size_t j = 0; j < d; ++j) x[j] = r * u[j];
      worst = std::max(worst, std::fabs(h.eval(x)) / b);
    }
  }
  return worst;
}

}  // namespace pqmc
