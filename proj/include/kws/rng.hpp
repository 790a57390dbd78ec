#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace kws {

/// Deterministic splittable RNG built on splitmix64 streams.
/// Every consumer derives its own child stream with split(); there is no
/// global state, so runs are bit-reproducible given the root seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Derive an independent child stream. Does not advance this stream.
  Rng split(std::string_view tag) const;
  Rng split(std::uint64_t index) const;

  std::uint64_t next_u64();
  double uniform();                      // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  int uniform_int(int lo, int hi);       // inclusive bounds
  double normal();                       // standard Gaussian, Box-Muller
  double normal(double mean, double sigma);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      auto j = static_cast<std::size_t>(uniform_int(0, static_cast<int>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

/// FNV-1a 64-bit hash; used for inventory checksums and rng stream tags.
std::uint64_t fnv1a64(const void* data, std::size_t n,
                      std::uint64_t h = 14695981039346656037ull);

}  // namespace kws
