#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace pqmc {

/// SplitMix64 output finalizer (Stafford "Mix13"). Bijective on 64 bits.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

/// Derives a child key from a parent key and a path of integers.
///
/// Used for stream splitting: master seed -> (method, m, repetition) keys.
/// Distinct paths give statistically independent keys; the derivation is
/// a pure function so results never depend on thread scheduling.
std::uint64_t derive_key(std::uint64_t parent,
                         std::initializer_list<std::uint64_t> path) noexcept;

/// Counter-based generator: output i is mix64(key + (i + 1) * gamma).
///
/// This is SplitMix64 viewed as a keyed counter-mode function, so any
/// element of the stream can be computed directly with `at(i)` and a
/// stream is identified entirely by its key. Satisfies
/// std::uniform_random_bit_generator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept { return at(counter_++); }

  [[nodiscard]] result_type at(std::uint64_t index) const noexcept {
    return mix64(key_ + (index + 1) * kGoldenGamma);
  }

  /// Uniform double on the open interval (0, 1): 53 random bits plus a
  /// half-ulp offset, so 0 and 1 are never produced.
  double uniform_open() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  [[nodiscard]] std::uint64_t key() const noexcept { return key_; }
  [[nodiscard]] std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace pqmc
