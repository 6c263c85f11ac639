#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pqmc {

/// Parameters of a (lambda, t, m, d)-net in base b; the net has
/// lambda * b^m points.
struct NetParams {
  int base = 2;
  int lambda = 1;
  int t = 0;
  int m = 0;
  int dim = 1;

  /// Throws ConfigError unless b >= 2, 1 <= lambda < b, 0 <= t <= m, d >= 1.
  void validate() const;
  [[nodiscard]] std::size_t size() const;

  friend bool operator==(const NetParams&, const NetParams&) = default;
};

enum class Randomization { none, digital_shift, owen_scramble };

std::string to_string(Randomization r);
Randomization parse_randomization(std::string_view s);

struct PointSetMeta {
  std::string generator;
  std::uint64_t seed = 0;
  Randomization randomization = Randomization::none;
  std::optional<NetParams> net;
};

/// Immutable n x d point set in [0,1)^d, rows in generation order.
class PointSet {
 public:
  /// Takes row-major values; throws DomainError if a coordinate falls
  /// outside [0,1) or the shape is empty/inconsistent.
  PointSet(std::size_t n, std::size_t d, std::vector<double> values,
           PointSetMeta meta);

  [[nodiscard]] std::size_t size() const noexcept { return n_; }
  [[nodiscard]] std::size_t dim() const noexcept { return d_; }
  [[nodiscard]] double operator()(std::size_t i, std::size_t j) const {
    return values_[i * d_ + j];
  }
  [[nodiscard]] std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * d_, d_};
  }
  [[nodiscard]] std::span<const double> values() const noexcept {
    return values_;
  }
  [[nodiscard]] const PointSetMeta& meta() const noexcept { return meta_; }

  friend bool operator==(const PointSet& a, const PointSet& b) {
    return a.n_ == b.n_ && a.d_ == b.d_ && a.values_ == b.values_;
  }

 private:
  std::size_t n_;
  std::size_t d_;
  std::vector<double> values_;
  PointSetMeta meta_;
};

/// Largest dimension covered by the bundled direction-number table.
inline constexpr int kMaxSobolDim = 64;
/// Direction numbers carry 32 bits, so prefixes up to 2^31 points are exact.
inline constexpr int kMaxSobolLog2 = 31;
/// Number of base-2 digits randomized by scrambling / digital shifts.
inline constexpr int kScrambleDigits = 53;

/// First 2^m points of the base-2 Sobol' sequence in natural (not Gray
/// code) order, starting at the origin. Throws UnsupportedDimension for
/// d > kMaxSobolDim.
PointSet sobol_points(int m, int d);

/// Nested uniform (Owen) scrambling in base 2 to kScrambleDigits digits.
///
/// Each digit is flipped by a random bit that depends on (seed, coordinate,
/// digit level, all higher input digits). Throws ConfigError when the input
/// is already randomized.
PointSet owen_scramble(const PointSet& points, std::uint64_t seed);

/// Random base-2 digital shift: one random 53-digit vector XORed into all
/// points. Throws ConfigError when the input is already randomized.
PointSet digital_shift(const PointSet& points, std::uint64_t seed);

/// Digital shift by explicit 53-bit digit vectors (one per coordinate).
PointSet digital_shift_by(const PointSet& points,
                          std::span<const std::uint64_t> shift_digits);

struct NetCheckOptions {
  /// Cap on (elementary-interval shapes) x (points) counting work.
  std::uint64_t budget = std::uint64_t{1} << 30;
};

/// Exhaustive check of the (lambda,t,m,d)-net property.
///
/// Every elementary interval of volume b^(t-m) must hold exactly
/// lambda*b^t points, and none of volume b^(t-m-1) may hold more than b^t.
/// False when the point count differs from lambda*b^m.
bool check_net(const PointSet& points, const NetParams& params,
               const NetCheckOptions& opts = {});

/// Exact star discrepancy for d in {1, 2}; UnsupportedDimension otherwise.
double star_discrepancy(const PointSet& points);

/// CSV dump: header dim0,...,dim{d-1}, 17 significant digits per value.
void write_csv(std::ostream& os, const PointSet& points);

namespace detail {
/// Map a coordinate in [0,1) to its leading kScrambleDigits binary digits.
std::uint64_t to_digits(double x) noexcept;
double from_digits(std::uint64_t digits) noexcept;
/// Scrambles point by point; same output as owen_scramble (test hook).
PointSet owen_scramble_pointwise(const PointSet& points, std::uint64_t seed);
}  // namespace detail

}  // namespace pqmc
