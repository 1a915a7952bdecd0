#include "autofield/rng.hpp"

#include <cmath>

namespace autofield {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t Rng::mix(std::uint64_t seed, std::string_view name) {
  return splitmix64(splitmix64(seed) ^ fnv1a64(name));
}

double normal01(Rng::Engine& engine) {
  // u1 must stay away from 0 for the log.
  double u1 = 0.0;
  do {
    u1 = uniform01(engine);
  } while (u1 <= 0.0);
  double u2 = uniform01(engine);
  constexpr double two_pi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

}  // namespace autofield
