#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace psim {

// Deterministic random stream. All draws are hand-rolled on top of
// std::mt19937_64 so that sequences are identical across standard library
// implementations (std::uniform_int_distribution and std::shuffle are not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double real01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). Unbiased (rejection sampling).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  /// Index drawn with probability weights[i] / total. Weights must be
  /// non-negative with a positive total.
  int categorical(std::span<const double> weights, double total) {
    double u = real01() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      u -= weights[i];
      if (u < 0.0) return static_cast<int>(i);
    }
    // Floating-point slack: fall back to the last positively weighted entry.
    for (std::size_t i = weights.size(); i-- > 0;) {
      if (weights[i] > 0.0) return static_cast<int>(i);
    }
    throw std::invalid_argument("Rng::categorical: all weights are zero");
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  /// Serialized engine state, for checkpoint/resume.
  std::string state() const;
  void set_state(const std::string& s);

 private:
  std::mt19937_64 engine_;
};

/// splitmix64 step; used to derive independent sub-stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Deterministic sub-seed for (seed, salt); distinct salts give independent
/// streams for the same user-facing seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t s = seed ^ (0xD1B54A32D192ED03ull * (salt + 1));
  return splitmix64(s);
}

}  // namespace psim
