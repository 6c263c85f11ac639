#include "pqmc/dist.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "pqmc/errors.hpp"

namespace pqmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

void check_probability(double p, const char* who) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DomainError(std::string(who) + ": probability outside [0,1]");
  }
}

void check_nu(double nu) {
  if (!(nu >= 1.0) || !std::isfinite(nu)) {
    throw DomainError("Student-t degrees of freedom must be >= 1");
  }
}

double t_log_norm(double nu) {
  return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
         0.5 * std::log(nu * std::numbers::pi);
}

// Wichura's AS241 (PPND16), relative accuracy about 1e-16.
double ppnd16(double p) {
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        ((((((2509.0809287301226727 * r + 33430.575583588128105) * r +
             67265.770927008700853) * r + 45921.953931549871457) * r +
           13731.693765509461125) * r + 1971.5909503065514427) * r +
         133.14166789178437745) * r + 3.387132872796366608;
    const double den =
        ((((((5226.495278852545925 * r + 28729.085735721942674) * r +
             39307.89580009271061) * r + 21213.794301586595867) * r +
           5394.1960214247511077) * r + 687.1870074920579083) * r +
         42.313330701600911252) * r + 1.0;
    return q * num / den;
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        ((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r +
             0.24178072517745061177) * r + 1.27045825245236838258) * r +
           3.64784832476320460504) * r + 5.7694972214606914055) * r +
         4.6303378461565452959) * r + 1.42343711074968357734;
    const double den =
        ((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r +
             0.0151986665636164571966) * r + 0.14810397642748007459) * r +
           0.68976733498510000455) * r + 1.6763848301838038494) * r +
         2.05319162663775882187) * r + 1.0;
    val = num / den;
  } else {
    r -= 5.0;
    const double num =
        ((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
             0.0012426609473880784386) * r + 0.026532189526576123093) * r +
           0.29656057182850489123) * r + 1.7848265399172913358) * r +
         5.4637849111641143699) * r + 6.6579046435011037772;
    const double den =
        ((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r +
             1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
           0.0148753612908506148525) * r + 0.13692988092273580531) * r +
         0.59983220655588793769) * r + 1.0;
    val = num / den;
  }
  return q < 0.0 ? -val : val;
}

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_cf(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) return h;
  }
  throw AccuracyError("incomplete beta continued fraction did not converge");
}

// Lower tail F(-s) for s >= 0, accurate in relative terms deep in the tail.
double t_lower_tail(double s, double nu) {
  if (std::isinf(s)) return 0.0;
  const double s2 = s * s;
  // Near the centre nu / (nu + s^2) rounds to 1, so use the complement; it
  // cancels badly once the tail is small, hence the switch at 0.01.
  if (s2 < nu) {
    const double centre = 0.5 - 0.5 * incomplete_beta(0.5, 0.5 * nu, s2 / (nu + s2));
    if (centre > 0.01) return centre;
  }
  return 0.5 * incomplete_beta(0.5 * nu, 0.5, nu / (nu + s2));
}

// Closed-form CDF of t(nu) for integer nu as a function of
// theta = atan(x / sqrt(nu)). Only used away from the tails, where the
// cancellation in 1/2 + ... costs nothing noticeable.
double t_cdf_theta(double theta, int nu) {
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  const double c2 = c * c;
  double term = 1.0;
  double sum = 1.0;
  if (nu % 2 == 1) {
    if (nu == 1) return 0.5 + theta / std::numbers::pi;
    for (int j = 2; j <= nu - 3; j += 2) {
      term *= c2 * j / (j + 1.0);
      sum += term;
    }
    return 0.5 + (theta + s * c * sum) / std::numbers::pi;
  }
  for (int j = 1; j <= nu - 3; j += 2) {
    term *= c2 * j / (j + 1.0);
    sum += term;
  }
  return 0.5 + 0.5 * s * sum;
}

constexpr int kTrigMaxNu = 64;
constexpr double kTrigMinTail = 1e-4;

// Newton in theta on the closed-form CDF; dF/dtheta = K sqrt(nu) cos^(nu-1).
double t_inv_trig(double p, int nu, double start) {
  const double k = std::exp(t_log_norm(nu)) * std::sqrt(double(nu));
  double lo = -0.5 * std::numbers::pi;
  double hi = 0.0;
  double theta = std::atan(start / std::sqrt(double(nu)));
  for (int it = 0; it < 100; ++it) {
    const double f = t_cdf_theta(theta, nu) - p;
    if (f == 0.0) break;
    if (f > 0.0) hi = theta;
    else lo = theta;
    const double slope = k * std::pow(std::cos(theta), nu - 1);
    double next = theta - f / slope;
    if (!(next >= lo && next <= hi)) next = 0.5 * (lo + hi);
    const bool done = std::fabs(next - theta) <= 2e-15;
    theta = next;
    if (done) break;
  }
  return std::sqrt(double(nu)) * std::tan(theta);
}

}  // namespace

double normal_pdf(double x) noexcept {
  return std::exp(-0.5 * x * x - kLogSqrt2Pi);
}

double normal_log_pdf(double x) noexcept { return -0.5 * x * x - kLogSqrt2Pi; }

double normal_cdf(double x) noexcept {
  return 0.5 * std::erfc(-x * std::numbers::sqrt2 * 0.5);
}

double phi_inv(double p) {
  check_probability(p, "phi_inv");
  if (p == 0.0) return -kInf;
  if (p == 1.0) return kInf;
  return ppnd16(p);
}

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw DomainError("incomplete_beta: shape parameters must be positive");
  }
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError("incomplete_beta: x outside [0,1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double lbeta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  const double front =
      std::exp(a * std::log(x) + b * std::log1p(-x) - lbeta);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double t_log_pdf(double x, double nu) {
  check_nu(nu);
  if (std::isinf(x)) return -kInf;
  return t_log_norm(nu) - 0.5 * (nu + 1.0) * std::log1p(x * x / nu);
}

double t_pdf(double x, double nu) { return std::exp(t_log_pdf(x, nu)); }

double t_cdf(double x, double nu) {
  check_nu(nu);
  if (std::isnan(x)) throw DomainError("t_cdf: NaN argument");
  if (x <= 0.0) return t_lower_tail(-x, nu);
  return 1.0 - t_lower_tail(x, nu);
}

double t_inv(double p, double nu) {
  check_probability(p, "t_inv");
  check_nu(nu);
  if (p == 0.0) return -kInf;
  if (p == 1.0) return kInf;
  if (p == 0.5) return 0.0;
  if (p > 0.5) return -t_inv(1.0 - p, nu);

  // p < 1/2: solve F(-s) = p for s > 0.
  if (nu == 1.0) return -1.0 / std::tan(std::numbers::pi * p);
  if (nu == 2.0) return (2.0 * p - 1.0) / std::sqrt(2.0 * p * (1.0 - p));

  // Cornish-Fisher start from the normal quantile.
  const double z = ppnd16(p);
  const double z2 = z * z;
  double x0 = z + z * (z2 + 1.0) / (4.0 * nu) +
              z * ((5.0 * z2 + 16.0) * z2 + 3.0) / (96.0 * nu * nu);
  if (!(x0 < 0.0)) x0 = z;

  if (nu == std::floor(nu) && nu <= kTrigMaxNu && p >= kTrigMinTail) {
    return t_inv_trig(p, static_cast<int>(nu), x0);
  }

  const double log_norm = t_log_norm(nu);
  double s = -x0;

  // Bracket [lo, hi] with F(-lo) >= p >= F(-hi).
  double lo = 0.0;
  double hi = s;
  while (t_lower_tail(hi, nu) > p) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) return -kInf;
  }
  const double log_p = std::log(p);
  for (int it = 0; it < 200; ++it) {
    const double f = t_lower_tail(s, nu);
    if (f > p) lo = std::max(lo, s);
    else hi = std::min(hi, s);
    // Newton on log F(-s) - log p, with dF(-s)/ds = -pdf(s).
    const double log_pdf = log_norm - 0.5 * (nu + 1.0) * std::log1p(s * s / nu);
    const double g = std::log(f) - log_p;
    double next = s + g * f / std::exp(log_pdf);
    if (!(next > lo && next < hi) || f == 0.0) next = 0.5 * (lo + hi);
    if (std::fabs(next - s) <= 4e-16 * std::max(1.0, s)) return -next;
    s = next;
    if (hi - lo <= 4e-16 * std::max(1.0, hi)) return -s;
  }
  return -s;
}

// ---------------------------------------------------------------------------

Marginal::Marginal(Family f, double nu) : family_(f), nu_(nu) {
  log_norm_ = f == Family::normal ? -kLogSqrt2Pi : t_log_norm(nu);
}

Marginal Marginal::student_t(double nu) {
  check_nu(nu);
  return Marginal(Family::student_t, nu);
}

double Marginal::log_pdf(double x) const {
  if (family_ == Family::normal) return -0.5 * x * x + log_norm_;
  if (std::isinf(x)) return -kInf;
  return log_norm_ - 0.5 * (nu_ + 1.0) * std::log1p(x * x / nu_);
}

double Marginal::pdf(double x) const { return std::exp(log_pdf(x)); }

double Marginal::cdf(double x) const {
  return family_ == Family::normal ? normal_cdf(x) : t_cdf(x, nu_);
}

double Marginal::quantile(double p) const {
  return family_ == Family::normal ? phi_inv(p) : t_inv(p, nu_);
}

double Marginal::second_moment() const {
  if (family_ == Family::normal) return 1.0;
  if (nu_ <= 2.0) return kInf;
  return nu_ / (nu_ - 2.0);
}

DistributionSpec::DistributionSpec(std::vector<Marginal> marginals)
    : marginals_(std::move(marginals)) {
  if (marginals_.empty()) {
    throw DomainError("distribution needs at least one coordinate");
  }
}

DistributionSpec DistributionSpec::standard_normal(std::size_t d) {
  return DistributionSpec(std::vector<Marginal>(d, Marginal::normal()));
}

DistributionSpec DistributionSpec::student_t(std::size_t d, double nu) {
  return DistributionSpec(std::vector<Marginal>(d, Marginal::student_t(nu)));
}

bool DistributionSpec::is_standard_normal() const noexcept {
  return std::all_of(marginals_.begin(), marginals_.end(), [](const Marginal& m) {
    return m.family() == Family::normal;
  });
}

double DistributionSpec::min_nu() const noexcept {
  double nu = kInf;
  for (const auto& m : marginals_) {
    if (m.family() == Family::student_t) nu = std::min(nu, m.nu());
  }
  return nu;
}

double DistributionSpec::log_pdf(std::span<const double> x) const {
  if (x.size() != marginals_.size()) {
    throw DomainError("log_pdf: dimension mismatch");
  }
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += marginals_[j].log_pdf(x[j]);
  return s;
}

double DistributionSpec::pdf(std::span<const double> x) const {
  return std::exp(log_pdf(x));
}

double DistributionSpec::second_moment() const {
  double s = 0.0;
  for (const auto& m : marginals_) s += m.second_moment();
  return s;
}

void DistributionSpec::map_inverse(std::span<const double> y,
                                   std::span<double> x) const {
  if (y.size() != marginals_.size() || x.size() != y.size()) {
    throw DomainError("map_inverse: dimension mismatch");
  }
  for (std::size_t j = 0; j < y.size(); ++j) x[j] = marginals_[j].quantile(y[j]);
}

std::vector<double> DistributionSpec::map_inverse(
    std::span<const double> y) const {
  std::vector<double> x(y.size());
  map_inverse(y, x);
  return x;
}

std::string DistributionSpec::describe() const {
  std::ostringstream os;
  const auto name = [](const Marginal& m) {
    std::ostringstream s;
    if (m.family() == Family::normal) s << "normal";
    else s << "t(" << m.nu() << ")";
    return s.str();
  };
  const bool uniform = std::all_of(
      marginals_.begin(), marginals_.end(),
      [&](const Marginal& m) { return m == marginals_.front(); });
  if (uniform) {
    os << name(marginals_.front()) << "^" << marginals_.size();
  } else {
    for (std::size_t j = 0; j < marginals_.size(); ++j) {
      if (j) os << " x ";
      os << name(marginals_[j]);
    }
  }
  return os.str();
}

DistributionSpec parse_distribution(std::string_view text, std::size_t d) {
  if (d == 0) throw DomainError("distribution dimension must be positive");
  if (text == "normal" || text == "gaussian") {
    return DistributionSpec::standard_normal(d);
  }
  std::string_view rest;
  if (text.starts_with("t:")) {
    rest = text.substr(2);
  } else if (text.starts_with("t(") && text.ends_with(")")) {
    rest = text.substr(2, text.size() - 3);
  } else {
    throw DomainError("unknown distribution '" + std::string(text) +
                      "' (expected normal, t:<nu> or t(<nu>))");
  }
  double nu = 0.0;
  const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), nu);
  if (ec != std::errc() || ptr != rest.data() + rest.size()) {
    throw DomainError("bad degrees of freedom in '" + std::string(text) + "'");
  }
  return DistributionSpec::student_t(d, nu);
}

}  // namespace pqmc
