#include "pqmc/rng.hpp"

namespace pqmc {

std::uint64_t derive_key(std::uint64_t parent,
                         std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t key = mix64(parent ^ 0x6a09e667f3bcc909ULL);
  for (std::uint64_t v : path) {
    key = mix64(key + kGoldenGamma + mix64(v ^ 0xbb67ae8584caa73bULL));
  }
  return key;
}

}  // namespace pqmc
