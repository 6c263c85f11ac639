#include "pqmc/lowdisc.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "pqmc/errors.hpp"
#include "pqmc/rng.hpp"

namespace pqmc {

namespace {

struct DirectionEntry {
  int degree;
  std::uint32_t poly;
  std::array<std::uint32_t, 18> init;
};

constexpr DirectionEntry kDirections[kMaxSobolDim] = {
#include "sobol_directions.inc"
};

constexpr int kDirectionBits = 32;

std::array<std::uint32_t, kDirectionBits> direction_numbers(int dim) {
  std::array<std::uint32_t, kDirectionBits> v{};
  const DirectionEntry& e = kDirections[dim];
  if (e.degree == 0) {
    for (int k = 0; k < kDirectionBits; ++k) v[k] = 1u << (31 - k);
    return v;
  }
  const int s = e.degree;
  for (int k = 0; k < s && k < kDirectionBits; ++k) {
    v[k] = e.init[k] << (31 - k);
  }
  for (int k = s; k < kDirectionBits; ++k) {
    v[k] = v[k - s] ^ (v[k - s] >> s);
    for (int i = 1; i < s; ++i) {
      if ((e.poly >> (s - 1 - i)) & 1u) v[k] ^= v[k - i];
    }
  }
  return v;
}

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

PointSetMeta randomized_meta(const PointSet& p, Randomization r,
                             std::uint64_t seed) {
  if (p.meta().randomization != Randomization::none) {
    throw ConfigError("point set '" + p.meta().generator +
                      "' is already randomized (" +
                      to_string(p.meta().randomization) + ")");
  }
  PointSetMeta meta = p.meta();
  meta.randomization = r;
  meta.seed = seed;
  return meta;
}

// Number of leading digits that can be nonzero, i.e. the digit level of the
// lowest set bit.
int significant_depth(std::uint64_t digits) {
  if (digits == 0) return 0;
  return kScrambleDigits - std::countr_zero(digits);
}

class NestedScrambler {
 public:
  NestedScrambler(std::uint64_t seed, std::size_t coord, int depth)
      : flip_key_(derive_key(seed, {coord, 0})),
        tail_key_(derive_key(seed, {coord, 1})),
        depth_(depth) {}

  // Flip bit for the node at `level` (1-based) reached by `prefix`, the
  // level-1 input digits above it.
  [[nodiscard]] std::uint64_t flip(int level, std::uint64_t prefix) const {
    const std::uint64_t node = (std::uint64_t{1} << (level - 1)) | prefix;
    return mix64(flip_key_ + node * kGoldenGamma) >> 63;
  }

  // Random digits below `depth_`, shared by all inputs with this prefix.
  [[nodiscard]] std::uint64_t tail(std::uint64_t prefix) const {
    const int bits = kScrambleDigits - depth_;
    if (bits == 0) return 0;
    const std::uint64_t node = (std::uint64_t{1} << depth_) | prefix;
    return mix64(tail_key_ + node * kGoldenGamma) >> (64 - bits);
  }

  [[nodiscard]] std::uint64_t scramble_one(std::uint64_t digits) const {
    std::uint64_t out = 0;
    std::uint64_t prefix = 0;
    for (int level = 1; level <= depth_; ++level) {
      const std::uint64_t bit = (digits >> (kScrambleDigits - level)) & 1u;
      out = (out << 1) | (bit ^ flip(level, prefix));
      prefix = (prefix << 1) | bit;
    }
    return (out << (kScrambleDigits - depth_)) | tail(prefix);
  }

  // Scrambled leading `depth_` digits for every possible input prefix,
  // built level by level so each tree node is hashed once.
  [[nodiscard]] std::vector<std::uint32_t> prefix_table() const {
    std::vector<std::uint32_t> cur{0};
    for (int level = 1; level <= depth_; ++level) {
      std::vector<std::uint32_t> next(cur.size() * 2);
      for (std::size_t p = 0; p < cur.size(); ++p) {
        const auto f = static_cast<std::uint32_t>(flip(level, p));
        next[2 * p] = (cur[p] << 1) | f;
        next[2 * p + 1] = (cur[p] << 1) | (1u ^ f);
      }
      cur = std::move(next);
    }
    return cur;
  }

  [[nodiscard]] int depth() const noexcept { return depth_; }

 private:
  std::uint64_t flip_key_;
  std::uint64_t tail_key_;
  int depth_;
};

constexpr int kMaxTableDepth = 24;

}  // namespace

void NetParams::validate() const {
  if (base < 2) throw ConfigError("net base must be >= 2");
  if (lambda < 1 || lambda >= base)
    throw ConfigError("net lambda must satisfy 1 <= lambda < base");
  if (m < 0 || t < 0 || t > m)
    throw ConfigError("net parameters must satisfy 0 <= t <= m");
  if (dim < 1) throw ConfigError("net dimension must be >= 1");
}

std::size_t NetParams::size() const {
  return static_cast<std::size_t>(lambda) *
         ipow(static_cast<std::size_t>(base), m);
}

std::string to_string(Randomization r) {
  switch (r) {
    case Randomization::none: return "none";
    case Randomization::digital_shift: return "digital-shift";
    case Randomization::owen_scramble: return "owen-scramble";
  }
  return "?";
}

Randomization parse_randomization(std::string_view s) {
  if (s == "none") return Randomization::none;
  if (s == "digital-shift" || s == "shift") return Randomization::digital_shift;
  if (s == "owen-scramble" || s == "owen" || s == "scramble")
    return Randomization::owen_scramble;
  throw ValidationError("unknown randomization '" + std::string(s) + "'");
}

PointSet::PointSet(std::size_t n, std::size_t d, std::vector<double> values,
                   PointSetMeta meta)
    : n_(n), d_(d), values_(std::move(values)), meta_(std::move(meta)) {
  if (n_ == 0 || d_ == 0) throw DomainError("point set must be non-empty");
  if (values_.size() != n_ * d_)
    throw DomainError("point set values do not match n x d");
  for (double v : values_) {
    if (!(v >= 0.0 && v < 1.0))
      throw DomainError("point coordinate outside [0,1)");
  }
}

namespace detail {

std::uint64_t to_digits(double x) noexcept {
  return static_cast<std::uint64_t>(std::ldexp(x, kScrambleDigits));
}

double from_digits(std::uint64_t digits) noexcept {
  return std::ldexp(static_cast<double>(digits), -kScrambleDigits);
}

}  // namespace detail

PointSet sobol_points(int m, int d) {
  if (d < 1) throw DomainError("Sobol' dimension must be >= 1");
  if (d > kMaxSobolDim) {
    throw UnsupportedDimension("Sobol' dimension " + std::to_string(d) +
                               " exceeds the bundled direction-number table (" +
                               std::to_string(kMaxSobolDim) + ")");
  }
  if (m < 0 || m > kMaxSobolLog2)
    throw DomainError("Sobol' resolution m must lie in [0, 31]");

  const std::size_t n = std::size_t{1} << m;
  const auto dim = static_cast<std::size_t>(d);
  std::vector<double> values(n * dim);
  std::vector<std::uint32_t> ints(n);
  for (std::size_t j = 0; j < dim; ++j) {
    const auto v = direction_numbers(static_cast<int>(j));
    ints[0] = 0;
    for (std::size_t i = 1; i < n; ++i) {
      ints[i] = ints[i & (i - 1)] ^ v[std::countr_zero(i)];
    }
    for (std::size_t i = 0; i < n; ++i) {
      values[i * dim + j] = std::ldexp(static_cast<double>(ints[i]), -32);
    }
  }
  PointSetMeta meta{"sobol", 0, Randomization::none, std::nullopt};
  // The first two Sobol' coordinates form a (0,m,2)-net; for d >= 3 the
  // quality parameter depends on the table and is not recorded.
  if (d <= 2) meta.net = NetParams{2, 1, 0, m, d};
  return PointSet(n, dim, std::move(values), std::move(meta));
}

PointSet owen_scramble(const PointSet& points, std::uint64_t seed) {
  PointSetMeta meta =
      randomized_meta(points, Randomization::owen_scramble, seed);
  const std::size_t n = points.size();
  const std::size_t d = points.dim();
  std::vector<double> out(n * d);
  std::vector<std::uint64_t> digits(n);
  for (std::size_t j = 0; j < d; ++j) {
    int depth = 0;
    for (std::size_t i = 0; i < n; ++i) {
      digits[i] = detail::to_digits(points(i, j));
      depth = std::max(depth, significant_depth(digits[i]));
    }
    const NestedScrambler scr(seed, j, depth);
    const bool use_table =
        depth <= kMaxTableDepth && (std::size_t{1} << depth) <= 4 * n;
    if (use_table) {
      const auto table = scr.prefix_table();
      const int shift = kScrambleDigits - depth;
      for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t prefix = digits[i] >> shift;
        const std::uint64_t s =
            (std::uint64_t{table[prefix]} << shift) | scr.tail(prefix);
        out[i * d + j] = detail::from_digits(s);
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        out[i * d + j] = detail::from_digits(scr.scramble_one(digits[i]));
      }
    }
  }
  return PointSet(n, d, std::move(out), std::move(meta));
}

namespace detail {

// Per-point scrambling path, kept to cross-check the prefix-table path.
PointSet owen_scramble_pointwise(const PointSet& points, std::uint64_t seed) {
  PointSetMeta meta =
      randomized_meta(points, Randomization::owen_scramble, seed);
  const std::size_t n = points.size();
  const std::size_t d = points.dim();
  std::vector<double> out(n * d);
  for (std::size_t j = 0; j < d; ++j) {
    int depth = 0;
    for (std::size_t i = 0; i < n; ++i) {
      depth = std::max(depth,
                       significant_depth(detail::to_digits(points(i, j))));
    }
    const NestedScrambler scr(seed, j, depth);
    for (std::size_t i = 0; i < n; ++i) {
      out[i * d + j] =
          detail::from_digits(scr.scramble_one(detail::to_digits(points(i, j))));
    }
  }
  return PointSet(n, d, std::move(out), std::move(meta));
}

}  // namespace detail

namespace {

PointSet apply_shift(const PointSet& points,
                     std::span<const std::uint64_t> shift_digits,
                     PointSetMeta meta) {
  if (shift_digits.size() != points.dim())
    throw ConfigError("digital shift needs one digit vector per coordinate");
  const std::size_t n = points.size();
  const std::size_t d = points.dim();
  constexpr std::uint64_t mask = (std::uint64_t{1} << kScrambleDigits) - 1;
  std::vector<double> out(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const std::uint64_t s =
          detail::to_digits(points(i, j)) ^ (shift_digits[j] & mask);
      out[i * d + j] = detail::from_digits(s);
    }
  }
  return PointSet(n, d, std::move(out), std::move(meta));
}

}  // namespace

PointSet digital_shift_by(const PointSet& points,
                          std::span<const std::uint64_t> shift_digits) {
  return apply_shift(points, shift_digits,
                     randomized_meta(points, Randomization::digital_shift, 0));
}

PointSet digital_shift(const PointSet& points, std::uint64_t seed) {
  PointSetMeta meta =
      randomized_meta(points, Randomization::digital_shift, seed);
  CounterRng rng(derive_key(seed, {0x5348494654ULL}));
  std::vector<std::uint64_t> shift(points.dim());
  for (auto& s : shift) s = rng() >> (64 - kScrambleDigits);
  return apply_shift(points, shift, std::move(meta));
}

namespace {

// Calls fn(k) for every composition k of `total` into `parts` nonnegative
// integers.
template <class Fn>
void for_each_composition(int total, int parts, std::vector<int>& k,
                          int index, Fn&& fn) {
  if (index == parts - 1) {
    k[index] = total;
    fn(k);
    return;
  }
  for (int v = 0; v <= total; ++v) {
    k[index] = v;
    for_each_composition(total - v, parts, k, index + 1, fn);
  }
}

std::uint64_t binomial(int n, int r) {
  if (r < 0 || r > n) return 0;
  std::uint64_t c = 1;
  for (int i = 1; i <= r; ++i) c = c * static_cast<std::uint64_t>(n - r + i) / i;
  return c;
}

// Maximum and minimum count over all elementary intervals with shape k.
std::pair<std::size_t, std::size_t> box_count_range(const PointSet& p, int base,
                                                    const std::vector<int>& k,
                                                    std::vector<std::size_t>& counts) {
  std::size_t boxes = 1;
  for (int kj : k) boxes *= ipow(static_cast<std::size_t>(base), kj);
  counts.assign(boxes, 0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    std::size_t index = 0;
    for (std::size_t j = 0; j < p.dim(); ++j) {
      const auto cells = ipow(static_cast<std::size_t>(base), k[j]);
      auto c = static_cast<std::size_t>(
          std::floor(p(i, j) * static_cast<double>(cells)));
      c = std::min(c, cells - 1);
      index = index * cells + c;
    }
    ++counts[index];
  }
  const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
  return {*lo, *hi};
}

}  // namespace

bool check_net(const PointSet& points, const NetParams& params,
               const NetCheckOptions& opts) {
  params.validate();
  // A set of the wrong size cannot fill every elementary interval exactly.
  if (points.size() != params.size()) return false;
  if (points.dim() != static_cast<std::size_t>(params.dim))
    throw DomainError("check_net: dimension mismatch");

  const int d = params.dim;
  const int k_fine = params.m - params.t;
  const std::uint64_t shapes =
      binomial(k_fine + d - 1, d - 1) + binomial(k_fine + d, d - 1);
  const std::uint64_t work = shapes * static_cast<std::uint64_t>(points.size());
  if (work > opts.budget) {
    throw BudgetError("check_net: enumeration of " + std::to_string(shapes) +
                      " interval shapes over " + std::to_string(points.size()) +
                      " points exceeds the budget");
  }

  const auto bt = ipow(static_cast<std::size_t>(params.base), params.t);
  const std::size_t exact = static_cast<std::size_t>(params.lambda) * bt;
  std::vector<int> k(static_cast<std::size_t>(d));
  std::vector<std::size_t> counts;
  bool ok = true;
  for_each_composition(k_fine, d, k, 0, [&](const std::vector<int>& shape) {
    if (!ok) return;
    const auto [lo, hi] = box_count_range(points, params.base, shape, counts);
    ok = lo == exact && hi == exact;
  });
  if (!ok) return false;
  for_each_composition(k_fine + 1, d, k, 0, [&](const std::vector<int>& shape) {
    if (!ok) return;
    const auto [lo, hi] = box_count_range(points, params.base, shape, counts);
    (void)lo;
    ok = hi <= bt;
  });
  return ok;
}

double star_discrepancy(const PointSet& points) {
  const std::size_t n = points.size();
  const auto nd = static_cast<double>(n);
  if (points.dim() == 1) {
    std::vector<double> x(points.values().begin(), points.values().end());
    std::sort(x.begin(), x.end());
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double target = (2.0 * static_cast<double>(i) + 1.0) / (2.0 * nd);
      worst = std::max(worst, std::abs(x[i] - target));
    }
    return 1.0 / (2.0 * nd) + worst;
  }
  if (points.dim() != 2) {
    throw UnsupportedDimension(
        "exact star discrepancy is implemented for d in {1, 2} only");
  }

  std::vector<std::pair<double, double>> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = {points(i, 0), points(i, 1)};
  std::sort(pts.begin(), pts.end());

  std::vector<double> grid2;
  grid2.reserve(n + 1);
  for (const auto& p : pts) grid2.push_back(p.second);
  grid2.push_back(1.0);
  std::sort(grid2.begin(), grid2.end());
  grid2.erase(std::unique(grid2.begin(), grid2.end()), grid2.end());

  std::vector<double> grid1;
  grid1.reserve(n + 1);
  for (const auto& p : pts) grid1.push_back(p.first);
  grid1.push_back(1.0);
  grid1.erase(std::unique(grid1.begin(), grid1.end()), grid1.end());

  // `open` holds x2 of points with x1 < u1, `closed` those with x1 <= u1.
  std::vector<double> open;
  std::vector<double> closed;
  std::size_t next = 0;
  double disc = 0.0;
  for (double u1 : grid1) {
    open = closed;
    while (next < n && pts[next].first <= u1) {
      const double y = pts[next].second;
      closed.insert(std::upper_bound(closed.begin(), closed.end(), y), y);
      if (pts[next].first < u1)
        open.insert(std::upper_bound(open.begin(), open.end(), y), y);
      ++next;
    }
    for (double u2 : grid2) {
      const double vol = u1 * u2;
      const auto c_open = static_cast<double>(
          std::lower_bound(open.begin(), open.end(), u2) - open.begin());
      const auto c_closed = static_cast<double>(
          std::upper_bound(closed.begin(), closed.end(), u2) - closed.begin());
      disc = std::max({disc, vol - c_open / nd, c_closed / nd - vol});
    }
  }
  return disc;
}

void write_csv(std::ostream& os, const PointSet& points) {
  for (std::size_t j = 0; j < points.dim(); ++j) {
    os << (j ? "," : "") << "dim" << j;
  }
  os << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = 0; j < points.dim(); ++j) {
      os << (j ? "," : "") << points(i, j);
    }
    os << '\n';
  }
}

}  // namespace pqmc
