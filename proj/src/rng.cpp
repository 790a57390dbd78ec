#include "kws/rng.hpp"

#include <cmath>

namespace kws {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

// splitmix64 finalizer
std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

Rng::Rng(std::uint64_t seed) : state_(mix(seed + kGamma)) {}

Rng Rng::split(std::string_view tag) const {
  return Rng(state_ ^ fnv1a64(tag.data(), tag.size()));
}

Rng Rng::split(std::uint64_t index) const {
  return Rng(state_ ^ fnv1a64(&index, sizeof(index)));
}

std::uint64_t Rng::next_u64() {
  state_ += kGamma;
  return mix(state_);
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int Rng::uniform_int(int lo, int hi) {
  auto range = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
  std::uint64_t reject_above = UINT64_MAX - UINT64_MAX % range;
  std::uint64_t r = next_u64();
  while (r >= reject_above) r = next_u64();
  return lo + static_cast<int>(r % range);
}

double Rng::normal() {
  // Box-Muller; draws two uniforms per sample, no caching so the stream
  // position stays a pure function of the call count.
  double u1 = 1.0 - uniform();  // (0, 1]
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double Rng::normal(double mean, double sigma) { return mean + sigma * normal(); }

}  // namespace kws
