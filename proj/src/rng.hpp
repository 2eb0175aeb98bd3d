#pragma once

#include <cstdint>
#include <random>

namespace fjsim {

// 64-bit uniform stream with deterministic substream derivation.
// Replication i of a run seeded with s draws from substream(s, i), so serial
// and thread-parallel executions consume identical randomness per replication.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(mix(seed ^ kStreamSalt)) {}

  static RngStream substream(std::uint64_t seed, std::uint64_t index) {
    return RngStream(mix(seed) ^ mix(index * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL));
  }

  // Derived seed for nested experiments (one seed per confidence interval,
  // one per finite-difference pair, ...).
  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return mix(mix(seed) + index);
  }

  // Uniform on the open interval (0, 1); never returns an endpoint.
  double uniform() {
    const std::uint64_t bits = gen_() >> 11;  // top 53 bits
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t raw() { return gen_(); }

 private:
  static constexpr std::uint64_t kStreamSalt = 0x5851F42D4C957F2DULL;

  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 gen_;
};

}  // namespace fjsim
