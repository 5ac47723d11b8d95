#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace bmrmm {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Stateless uniform on (0,1) addressed by (key, index).
///
/// Record-level kernels draw one of these per record so the result does not
/// depend on how records are split across threads.
inline double counter_uniform(std::uint64_t key, std::uint64_t index) {
  const std::uint64_t bits = splitmix64(key ^ splitmix64(index + 1));
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Seed of chain `index` derived from a root seed. Chain 0 keeps the root
/// seed; distinct indices always give distinct seeds.
constexpr std::uint64_t derive_chain_seed(std::uint64_t root, std::uint64_t index) {
  return root ^ (index * 0x9E3779B97F4A7C15ULL);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0,1).
  double uniform();
  double normal();

  /// Ga(shape, rate) with rate parameterization.
  double gamma(double shape, double rate = 1.0);

  /// log of a Ga(shape, 1) variate; stays finite for very small shapes.
  double log_gamma_variate(double shape);

  double beta(double a, double b);

  /// Dirichlet(concentration) draw. Components that would underflow are
  /// floored at the smallest normal double before renormalizing.
  void dirichlet(std::span<const double> concentration, std::span<double> out);

  /// Index drawn with probability proportional to `weights`.
  std::size_t categorical(std::span<const double> weights);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace bmrmm
