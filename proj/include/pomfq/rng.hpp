#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace pomfq {

/// splitmix64 finalizer; also used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t mix64(std::uint64_t x);

/// Seed for a named sub-stream: hash of (base, a, b).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

/// xoshiro256** generator with a small, serializable state.
///
/// All distributions used by the library are implemented here rather than
/// through <random> so that sample sequences are identical across standard
/// library implementations and can be checkpointed exactly.
class Rng {
 public:
  using result_type = std::uint64_t;
  using State = std::array<std::uint64_t, 4>;

  explicit Rng(std::uint64_t seed = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  /// Independent child stream `index`; does not advance this generator.
  Rng split(std::uint64_t index) const;

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  /// Uniform on (0, 1).
  double uniform_open();
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);
  bool bernoulli(double p);
  /// Standard normal via the polar method. The spare variate is discarded so
  /// the generator state alone determines the stream.
  double normal();
  /// Gamma(shape, 1) by Marsaglia-Tsang; shape < 1 uses the U^(1/shape) boost.
  double gamma(double shape);

  const State& state() const { return s_; }
  void set_state(const State& s) { s_ = s; }

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  State s_{};
};

}  // namespace pomfq
