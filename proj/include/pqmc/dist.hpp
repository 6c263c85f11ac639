#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pqmc {

// Scalar densities, distribution functions and quantiles. Quantiles accept
// the closed interval [0,1] and return signed infinity at the endpoints.

double normal_pdf(double x) noexcept;
double normal_log_pdf(double x) noexcept;
double normal_cdf(double x) noexcept;
/// Inverse standard normal CDF; DomainError for p outside [0,1].
double phi_inv(double p);

double t_pdf(double x, double nu);
double t_log_pdf(double x, double nu);
double t_cdf(double x, double nu);
/// Student-t quantile; DomainError for p outside [0,1] or nu < 1.
double t_inv(double p, double nu);

/// Regularized incomplete beta I_x(a, b) for a, b > 0, x in [0, 1].
double incomplete_beta(double a, double b, double x);

enum class Family { normal, student_t };

/// One marginal of a product distribution.
class Marginal {
 public:
  static Marginal normal() { return Marginal(Family::normal, 0.0); }
  /// DomainError unless nu >= 1.
  static Marginal student_t(double nu);

  [[nodiscard]] Family family() const noexcept { return family_; }
  [[nodiscard]] double nu() const noexcept { return nu_; }

  [[nodiscard]] double pdf(double x) const;
  [[nodiscard]] double log_pdf(double x) const;
  [[nodiscard]] double cdf(double x) const;
  [[nodiscard]] double quantile(double p) const;
  /// E[X^2]; +infinity for Student-t with nu <= 2.
  [[nodiscard]] double second_moment() const;

  friend bool operator==(const Marginal& a, const Marginal& b) {
    return a.family_ == b.family_ && a.nu_ == b.nu_;
  }

 private:
  Marginal(Family f, double nu);

  Family family_;
  double nu_;
  double log_norm_;  // log of the density normalizing constant
};

/// Independent product distribution g(x) = prod_j g_j(x_j) on R^d.
class DistributionSpec {
 public:
  explicit DistributionSpec(std::vector<Marginal> marginals);

  static DistributionSpec standard_normal(std::size_t d);
  static DistributionSpec student_t(std::size_t d, double nu);

  [[nodiscard]] std::size_t dim() const noexcept { return marginals_.size(); }
  [[nodiscard]] const Marginal& marginal(std::size_t j) const {
    return marginals_[j];
  }
  [[nodiscard]] bool is_standard_normal() const noexcept;
  /// Smallest degrees of freedom over Student-t marginals (inf if none).
  [[nodiscard]] double min_nu() const noexcept;

  [[nodiscard]] double log_pdf(std::span<const double> x) const;
  [[nodiscard]] double pdf(std::span<const double> x) const;
  /// E|X|^2 summed over coordinates.
  [[nodiscard]] double second_moment() const;

  /// Componentwise quantile F^{-1}(y); y_j in {0,1} maps to -inf/+inf.
  void map_inverse(std::span<const double> y, std::span<double> x) const;
  [[nodiscard]] std::vector<double> map_inverse(std::span<const double> y) const;

  [[nodiscard]] std::string describe() const;

  friend bool operator==(const DistributionSpec&, const DistributionSpec&) = default;

 private:
  std::vector<Marginal> marginals_;
};

/// Parses "normal" or "t:<nu>" / "t(<nu>)" into a d-dimensional product.
DistributionSpec parse_distribution(std::string_view text, std::size_t d);

}  // namespace pqmc
