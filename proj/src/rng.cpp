#include "rlclarity/rng.hpp"

namespace rlclarity::rng {

namespace {

constexpr std::uint32_t kPhiloxW32A = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW32B = 0xBB67AE85u;
constexpr std::uint32_t kPhiloxM4x32A = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM4x32B = 0xCD9E8D57u;

inline void mul_hi_lo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo,
                      std::uint32_t& hi) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(product);
  hi = static_cast<std::uint32_t>(product >> 32);
}

inline void one_round(std::array<std::uint32_t, 4>& ctr,
                      const std::array<std::uint32_t, 2>& key) {
  std::uint32_t lo0, hi0, lo1, hi1;
  mul_hi_lo(kPhiloxM4x32A, ctr[0], lo0, hi0);
  mul_hi_lo(kPhiloxM4x32B, ctr[2], lo1, hi1);
  ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW32A;
      key[1] += kPhiloxW32B;
    }
    one_round(counter, key);
  }
  return counter;
}

double u01(std::uint64_t seed, std::uint32_t a, std::uint32_t b,
           std::uint32_t c, std::uint32_t d) {
  const auto block = philox4x32(
      {a, b, c, d},
      {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
  const std::uint64_t bits =
      (static_cast<std::uint64_t>(block[0]) << 32) | block[1];
  // Top 53 bits -> [0, 1) on the canonical grid.
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

double uniform_sym(std::uint64_t seed, std::uint32_t a, std::uint32_t b,
                   std::uint32_t c, std::uint32_t d) {
  return 2.0 * u01(seed, a, b, c, d) - 1.0;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char byte : data) {
    hash ^= byte;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

}  // namespace rlclarity::rng
