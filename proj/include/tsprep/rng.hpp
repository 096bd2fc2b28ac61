#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string_view>

namespace tsprep {

/// splitmix64 step. Used to expand seeds into xoshiro state.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// xoshiro256** seeded through splitmix64.
///
/// The algorithm is fixed so that a given seed yields the same stream on every
/// platform and release. Bounded draws and shuffles are implemented here too,
/// since std::uniform_int_distribution and std::shuffle are not portable.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  /// Independent stream for (seed, purpose, index). Streams for different
  /// purposes never share draws, so toggling one pipeline step cannot shift
  /// the random numbers seen by another.
  static Rng substream(std::uint64_t seed, std::string_view purpose, std::uint64_t index = 0) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the purpose tag
    for (unsigned char ch : purpose) h = (h ^ ch) * 0x100000001b3ULL;
    std::uint64_t sm = seed ^ h;
    std::uint64_t mixed = splitmix64(sm);
    sm = mixed ^ (index * 0xd1b54a32d192ed03ULL);
    return Rng(splitmix64(sm));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform integer in [0, bound). Rejection sampling, no modulo bias.
  std::uint64_t bounded(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = (*this)();
      if (r >= threshold) return r % bound;
    }
  }

  /// Fisher-Yates, last element first.
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t k = items.size(); k > 1; --k) {
      const std::size_t j = static_cast<std::size_t>(bounded(k));
      std::swap(items[k - 1], items[j]);
    }
  }

  /// Moves a uniformly chosen `count`-subset to the front of `items`.
  template <typename T>
  void partial_shuffle(std::span<T> items, std::size_t count) {
    for (std::size_t k = 0; k < count && k < items.size(); ++k) {
      const std::size_t j = k + static_cast<std::size_t>(bounded(items.size() - k));
      std::swap(items[k], items[j]);
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::array<std::uint64_t, 4> state_{};
};

/// Seeded generator, or one seeded from OS entropy when no seed is given.
inline Rng rng_from_seed(std::optional<std::uint64_t> seed) {
  if (seed) return Rng(*seed);
  std::random_device rd;
  return Rng((std::uint64_t{rd()} << 32) ^ rd());
}

/// The seed actually used: the given one, or a fresh draw from OS entropy.
inline std::uint64_t resolve_seed(std::optional<std::uint64_t> seed) {
  if (seed) return *seed;
  std::random_device rd;
  return (std::uint64_t{rd()} << 32) ^ rd();
}

}  // namespace tsprep
