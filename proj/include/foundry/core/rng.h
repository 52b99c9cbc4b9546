#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace foundry {

std::uint64_t splitmix64(std::uint64_t x);

/// Mixes a base seed with a string key (FNV-1a over the key, then splitmix).
/// Used to give every logical request its own stream, independent of
/// scheduling order.
std::uint64_t derive_seed(std::uint64_t base, std::string_view key);

/// Thin wrapper over mt19937_64 with distribution helpers written out
/// explicitly so sequences do not depend on the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next() { return engine_(); }
  double uniform();                                  // [0, 1)
  std::uint64_t below(std::uint64_t n);              // [0, n)
  bool bernoulli(double p) { return uniform() < p; }
  double normal();
  /// exp(sigma*Z - sigma^2/2): unit mean lognormal multiplier.
  double lognormal_unit_mean(double sigma);

 private:
  std::mt19937_64 engine_;
};

}  // namespace foundry
