#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace autofield {

// Seedable RNG with named streams. Each consumer (init, dropout, gumbel,
// shuffle, ...) derives its own engine from the master seed and a stream
// name, so adding a consumer never shifts another stream's draws. Identical
// seed + stream name always yields an identical sequence.
class Rng {
 public:
  using Engine = std::mt19937_64;

  explicit Rng(std::uint64_t seed) : seed_(seed) {}

  Engine stream(std::string_view name) const { return Engine(mix(seed_, name)); }
  std::uint64_t seed() const { return seed_; }

  static std::uint64_t mix(std::uint64_t seed, std::string_view name);

 private:
  std::uint64_t seed_;
};

// Uniform draw in [0,1) built from the top 53 bits of the engine output.
// Bit-exact on every platform, unlike std::uniform_real_distribution.
inline double uniform01(Rng::Engine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller (uses two uniforms per draw, no cached
// second value, so the stream position is predictable).
double normal01(Rng::Engine& engine);

// Integer in [0, bound). Rejection-free modulo is fine here; bound is tiny
// relative to 2^64 so the bias is unobservable.
inline std::uint64_t uniform_below(Rng::Engine& engine, std::uint64_t bound) {
  return engine() % bound;
}

// FNV-1a: stable 64-bit content hash for stream names and config hashing.
inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

// Fisher-Yates with our own index draws for cross-platform stability.
template <typename T>
void shuffle_in_place(std::vector<T>& items, Rng::Engine& engine) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(uniform_below(engine, i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace autofield
