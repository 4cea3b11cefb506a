#pragma once

#include <cstdint>
#include <random>

namespace meco {

// Deterministic uniform-[0,1) stream. One instance per chain per episode; no
// global randomness anywhere so that runs are reproducible and policies can be
// compared under common random numbers.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : engine_(seed) {}

  // Uniform double in [0,1) with 53 random bits.
  double next() { return (engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

// splitmix64-style finalizer used to derive per-chain sub-stream seeds from an
// episode seed. Keeping the CPU and channel streams disjoint means changing
// one chain's parameters never perturbs the other's sample path.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream_id) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream_id + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace meco
