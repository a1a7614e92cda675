#pragma once

#include <cstdint>

namespace rainfall::numerics {

/// Counter-based generator keyed by (seed, stream).
///
/// key      = mix(seed ^ mix(stream + φ))
/// draw[k]  = mix(key + (k + 1)·φ),  k = 0, 1, 2, ...
///
/// where φ = 0x9E3779B97F4A7C15 and mix is the SplitMix64 finalizer. Draw k
/// depends only on (seed, stream, k), so sequences are identical on every
/// platform and independent of thread scheduling. Child generators for
/// per-site or per-restart work come from derive(), which re-keys with the
/// parent key as seed.
class RngState {
 public:
  RngState() : RngState(0, 0) {}
  RngState(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept;
  /// Uniform on the open interval (0, 1) with 53-bit resolution.
  double uniform() noexcept;
  /// Standard normal via Box-Muller (consumes two draws, returns one).
  double normal() noexcept;

  /// Independent generator for a sub-stream; does not advance this one.
  RngState derive(std::uint64_t substream) const noexcept;

  static std::uint64_t mix(std::uint64_t z) noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace rainfall::numerics
