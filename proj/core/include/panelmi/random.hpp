#pragma once

#include <cstdint>
#include <random>

namespace panelmi {

/// Combine a run seed and a stream index into an independent 64-bit seed.
///
/// splitmix64 finalizer applied to `seed ^ (0x9E3779B97F4A7C15 * (stream + 1))`.
/// The function is part of the reproducibility contract and must not change.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Seeded generator with distribution algorithms fixed by this library.
///
/// The engine is std::mt19937_64 (bit-exact by the standard). The standard
/// distribution objects are implementation-defined, so every variate is
/// produced here:
///   uniform01     top 53 bits of one engine output, in [0, 1)
///   index(n)      rejection sampling on the top bits, unbiased
///   normal        Marsaglia polar method, spare value cached
///   gamma(a)      Marsaglia-Tsang squeeze; a < 1 via the u^(1/a) boost
///   chi_squared   2 * gamma(df / 2)
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform01();
  std::size_t index(std::size_t n);
  double normal();
  double gamma(double shape);
  double chi_squared(double df);

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace panelmi
