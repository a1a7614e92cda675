#include "rainfall/numerics/rng.hpp"

#include <cmath>
#include <numbers>

namespace rainfall::numerics {
namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t RngState::mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

RngState::RngState(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), key_(mix(seed ^ mix(stream + kGolden))) {}

std::uint64_t RngState::next_u64() noexcept {
  ++counter_;
  return mix(key_ + counter_ * kGolden);
}

double RngState::uniform() noexcept {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngState::normal() noexcept {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

RngState RngState::derive(std::uint64_t substream) const noexcept { return RngState(key_, substream); }

}  // namespace rainfall::numerics
