#pragma once

#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <random>
#include <string>

namespace artex {

/// Deterministic random stream.
///
/// Built on std::mt19937_64, whose output sequence is fixed by the standard.
/// The real-valued draws below are derived from raw 64-bit outputs by hand
/// instead of through <random> distributions, whose algorithms are left to the
/// library vendor; this keeps every stream bit-identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal draw (Box-Muller, one output per call).
  double normal();

  /// Bernoulli(p) draw.
  bool bernoulli(double p) { return uniform() < p; }

  friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

  std::string state() const;
  void set_state(const std::string& text);

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives a child seed from a parent and a tuple of tags; order sensitive.
std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> tags) noexcept;

}  // namespace artex
