#pragma once

#include <cstdint>
#include <random>

#include "pcsi/field.h"

namespace pcsi {

// Independent sub-stream seed for a given purpose (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [lo, hi].
  std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(engine_);
  }
  Fe element(const PrimeField& f) { return Fe(static_cast<std::uint16_t>(uniform(0, f.modulus() - 1))); }
  Fe nonzero(const PrimeField& f) { return Fe(static_cast<std::uint16_t>(uniform(1, f.modulus() - 1))); }
  bool coin() { return uniform(0, 1) == 1; }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace pcsi
