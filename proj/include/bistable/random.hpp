#pragma once

#include <cstdint>
#include <limits>

namespace bistable {

inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Key of an independent sub-stream; streams for distinct (key, index) pairs do
// not overlap in practice.
inline constexpr std::uint64_t derive_seed(std::uint64_t key, std::uint64_t index) {
  return splitmix64(splitmix64(key) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

// Counter-based generator: output k is splitmix64(key + k * gamma). Any draw is
// addressable without replaying the stream, so parallel workers reproduce the
// serial sequence exactly. Satisfies std::uniform_random_bit_generator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(std::uint64_t seed) : key_(splitmix64(seed)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() { return at(counter_++); }

  constexpr result_type at(std::uint64_t k) const {
    return splitmix64(key_ + k * 0x9e3779b97f4a7c15ULL);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  void seek(std::uint64_t k) { counter_ = k; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace bistable
