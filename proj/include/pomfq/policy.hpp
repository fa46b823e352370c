#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pomfq/rng.hpp"

namespace pomfq {

/// softmax(q / temperature), stabilized by subtracting max(q). Greedy toward
/// high Q as temperature -> 0.
std::vector<double> boltzmann_probs(std::span<const double> qvalues, double temperature);

/// sum_a probs[a] * q[a]
double expected_value(std::span<const double> probs, std::span<const double> qvalues);

/// Inverse-CDF draw from a probability vector.
int sample_index(std::span<const double> probs, Rng& rng);

/// Temperature decays linearly from `initial` at episode 0 to `final` at
/// episode `horizon - 1`, then stays at `final`.
struct TemperatureSchedule {
  double initial = 1.0;
  double final = 0.01;
  std::uint64_t horizon = 1;

  double at(std::uint64_t episode) const;
};

}  // namespace pomfq
