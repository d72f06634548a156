#pragma once

#include <array>
#include <cstdint>
#include <span>

// Counter-based random numbers (Philox4x32-10).  Every draw is addressed by
// (seed, stream, index), so any slice of any stream can be regenerated from
// scratch by any thread.  All Monte Carlo code in this library pulls from
// fixed index ranges, which is what makes results independent of the number
// of worker threads.

namespace confsets {

namespace stream {
// Stream ids keep logically distinct draw sequences from colliding.
inline constexpr std::uint32_t kCoverage = 0;   // shape-coverage Monte Carlo
inline constexpr std::uint32_t kNoise = 1;      // simulation noise vectors
inline constexpr std::uint32_t kInterior = 2;   // rejection sampling inside shapes
inline constexpr std::uint32_t kCone = 3;       // cone probe directions
inline constexpr std::uint32_t kVolume = 4;     // volume estimation
inline constexpr std::uint32_t kMisc = 5;
}  // namespace stream

/// One Philox4x32 block: 10 rounds, 128-bit counter, 64-bit key.
std::array<std::uint32_t, 4> philox4x32(std::uint64_t key,
                                        const std::array<std::uint32_t, 4>& counter);

/// Uniform draw in (0,1) at a fixed index of a stream.
double uniform_at(std::uint64_t seed, std::uint32_t stream, std::uint64_t index);

/// Standard normal draw at a fixed scalar index of a stream.
double normal_at(std::uint64_t seed, std::uint32_t stream, std::uint64_t index);

/// Fills `out` with standard normals occupying scalar indices
/// [first_index, first_index + out.size()) of the stream.  The value written
/// for a given scalar index never depends on the span boundaries.
void normal_fill(std::uint64_t seed, std::uint32_t stream, std::uint64_t first_index,
                 std::span<double> out);

/// Convenience stateful wrapper for code that just wants "the next draw".
class SequentialRng {
public:
  SequentialRng(std::uint64_t seed, std::uint32_t stream) : seed_(seed), stream_(stream) {}

  double uniform() { return uniform_at(seed_, stream_, uniform_index_++); }
  double normal() { return normal_at(seed_, stream_, normal_index_++); }

private:
  std::uint64_t seed_;
  std::uint32_t stream_;
  std::uint64_t uniform_index_ = 0;
  std::uint64_t normal_index_ = 0;
};

}  // namespace confsets
