#pragma once

#include <array>
#include <cstdint>

namespace levybsde {

/// Philox4x32-10 block function (Salmon et al., Random123). Counter-based:
/// every (key, counter) pair maps to four independent 32-bit words.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Sequential stream over Philox blocks for one (seed, stream, substream)
/// triple. Paths use stream = path_id and substream = step index, so any
/// (path, step) can be regenerated independently of all others.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint32_t substream);

  std::uint32_t next_u32();
  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  /// Standard normal via Box-Muller; consumes exactly two uniforms.
  double normal();
  /// Poisson(mean) by inversion; means above 32 are split into chunks.
  std::uint64_t poisson(double mean);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
};

/// Reserved stream id for the Brownian path shared by all paths of a bundle.
inline constexpr std::uint64_t kSharedBrownianStream = 0xB5A3'0000'0000'0001ULL;

/// Mixes several integers into one seed (SplitMix64 finalizer chain).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace levybsde
