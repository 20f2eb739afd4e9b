#pragma once

#include <cstdint>
#include <random>

#include "spikereg/types.hpp"

namespace spikereg {

// Named substreams derived from one master seed. Runs that share a master
// seed see identical plant and measurement draws no matter which framework
// consumes them, because each consumer pulls from its own stream.
enum class noise_stream : std::uint64_t {
  plant = 1,
  measurement = 2,
  decoder = 3,
  decoder_target = 4,
  membrane = 5,
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::mt19937_64 make_stream(std::uint64_t master, noise_stream which) {
  std::uint64_t state =
      master + 0xD1B54A32D192ED03ull * (static_cast<std::uint64_t>(which) + 1);
  const std::uint64_t a = splitmix64(state);
  const std::uint64_t b = splitmix64(state);
  return std::mt19937_64(a ^ (b << 1));
}

// Draws one sample from N(0, cov). cov must be symmetric positive
// semidefinite; a spectral square root is used so singular covariances are
// accepted.
Vec sample_gaussian(std::mt19937_64& gen, const Mat& cov);

}  // namespace spikereg
