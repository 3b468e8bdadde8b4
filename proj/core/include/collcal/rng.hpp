#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace collcal {

/// 64-bit FNV-1a. Used for seed derivation and input digests.
[[nodiscard]] std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// Sub-seed for one subsystem: splitmix64(seed ^ fnv1a64(purpose)).
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose) noexcept;

/// Portable random source. std::mt19937_64 is bit-specified by the standard;
/// the distributions are implemented here because the standard library ones
/// are not reproducible across implementations.
class Rng {
 public:
  static constexpr std::string_view kName = "mt19937_64/u53/box-muller";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller; the second variate is cached.
  double normal();
  double normal(double mean, double sigma) { return mean + sigma * normal(); }

 private:
  std::mt19937_64 engine_;
  double cached_{0.0};
  bool has_cached_{false};
};

}  // namespace collcal
