#include "confsets/rng.hpp"

#include <cmath>
#include <numbers>

namespace confsets {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& x, std::uint32_t k0, std::uint32_t k1) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * x[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * x[2];
  const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
  x = {hi1 ^ x[1] ^ k0, lo1, hi0 ^ x[3] ^ k1, lo0};
}

// Block of two uniforms in [0,1) computed from one Philox call.  u0 is offset
// away from zero so log(u0) is always finite.
struct PairU64 {
  std::uint64_t a;
  std::uint64_t b;
};

inline PairU64 philox_u64_pair(std::uint64_t seed, const std::array<std::uint32_t, 4>& ctr) {
  const auto x = philox4x32(seed, ctr);
  return {(static_cast<std::uint64_t>(x[0]) << 32) | x[1],
          (static_cast<std::uint64_t>(x[2]) << 32) | x[3]};
}

// counter[3] tags the draw kind so normal blocks and uniform draws of the
// same stream never reuse bits.
constexpr std::uint32_t kKindNormal = 0;
constexpr std::uint32_t kKindUniform = 1;

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::uint64_t key,
                                        const std::array<std::uint32_t, 4>& counter) {
  std::array<std::uint32_t, 4> x = counter;
  std::uint32_t k0 = static_cast<std::uint32_t>(key);
  std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
  for (int round = 0; round < 10; ++round) {
    philox_round(x, k0, k1);
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return x;
}

double uniform_at(std::uint64_t seed, std::uint32_t stream, std::uint64_t index) {
  const std::array<std::uint32_t, 4> ctr = {static_cast<std::uint32_t>(index),
                                            static_cast<std::uint32_t>(index >> 32), stream,
                                            kKindUniform};
  const auto u = philox_u64_pair(seed, ctr);
  // 53-bit mantissa, shifted to the open interval (0,1).
  return (static_cast<double>(u.a >> 11) + 0.5) * 0x1.0p-53;
}

namespace {

// Box-Muller pair for normal block index b (scalar indices 2b and 2b+1).
inline void normal_pair(std::uint64_t seed, std::uint32_t stream, std::uint64_t block,
                        double& z0, double& z1) {
  const std::array<std::uint32_t, 4> ctr = {static_cast<std::uint32_t>(block),
                                            static_cast<std::uint32_t>(block >> 32), stream,
                                            kKindNormal};
  const auto u = philox_u64_pair(seed, ctr);
  const double u1 = (static_cast<double>(u.a >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
  const double u2 = static_cast<double>(u.b >> 11) * 0x1.0p-53;          // [0,1)
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  z0 = r * std::cos(theta);
  z1 = r * std::sin(theta);
}

}  // namespace

double normal_at(std::uint64_t seed, std::uint32_t stream, std::uint64_t index) {
  double z0, z1;
  normal_pair(seed, stream, index >> 1, z0, z1);
  return (index & 1u) ? z1 : z0;
}

void normal_fill(std::uint64_t seed, std::uint32_t stream, std::uint64_t first_index,
                 std::span<double> out) {
  std::size_t i = 0;
  const std::size_t n = out.size();
  if (n == 0) return;
  std::uint64_t idx = first_index;
  double z0, z1;
  if (idx & 1u) {  // leading odd scalar index: take the second half of its block
    normal_pair(seed, stream, idx >> 1, z0, z1);
    out[i++] = z1;
    ++idx;
  }
  while (i + 2 <= n) {
    normal_pair(seed, stream, idx >> 1, z0, z1);
    out[i] = z0;
    out[i + 1] = z1;
    i += 2;
    idx += 2;
  }
  if (i < n) {  // trailing even index: first half of the final block
    normal_pair(seed, stream, idx >> 1, z0, z1);
    out[i] = z0;
  }
}

}  // namespace confsets
