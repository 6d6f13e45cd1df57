#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace rlclarity::rng {

// Philox-4x32-10 counter-based generator (Salmon et al., SC 2011).
// Stateless: the caller names each draw by a 128-bit counter and a 64-bit
// key, so every stream is reproducible and order-independent.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// Uniform double in [0, 1) from the first 64 bits of one Philox block.
// The counter is assembled as (a, b, c, d); `seed` forms the key.
double u01(std::uint64_t seed, std::uint32_t a, std::uint32_t b,
           std::uint32_t c, std::uint32_t d);

// Uniform double in [-1, 1).
double uniform_sym(std::uint64_t seed, std::uint32_t a, std::uint32_t b,
                   std::uint32_t c, std::uint32_t d);

// FNV-1a 64-bit hash; used to fold string ids into counter words.
std::uint64_t fnv1a64(std::string_view data);

// Domain tags keeping independent draw purposes on disjoint streams.
enum stream_tag : std::uint32_t {
  kStreamRollout = 1,
  kStreamJitter = 2,
  kStreamPolicyWeight = 3,
  kStreamProbe = 4,
};

}  // namespace rlclarity::rng
