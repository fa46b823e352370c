#include "pomfq/policy.hpp"

#include <algorithm>
#include <cmath>

#include "pomfq/errors.hpp"

namespace pomfq {

std::vector<double> boltzmann_probs(std::span<const double> qvalues, double temperature) {
  if (!(temperature > 0.0)) throw ArgumentError("boltzmann_probs: temperature must be positive");
  if (qvalues.empty()) throw ArgumentError("boltzmann_probs: empty action set");
  const double qmax = *std::max_element(qvalues.begin(), qvalues.end());
  std::vector<double> p(qvalues.size());
  double total = 0.0;
  for (std::size_t i = 0; i < qvalues.size(); ++i) {
    p[i] = std::exp((qvalues[i] - qmax) / temperature);
    total += p[i];
  }
  for (double& x : p) x /= total;
  return p;
}

double expected_value(std::span<const double> probs, std::span<const double> qvalues) {
  if (probs.size() != qvalues.size()) throw DimensionError("expected_value: length mismatch");
  double v = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) v += probs[i] * qvalues[i];
  return v;
}

int sample_index(std::span<const double> probs, Rng& rng) {
  const double u = rng.uniform();
  double cdf = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cdf += probs[i];
    if (u < cdf) return static_cast<int>(i);
  }
  // Rounding left the CDF short of one: return the last action with mass.
  for (std::size_t i = probs.size(); i-- > 0;)
    if (probs[i] > 0.0) return static_cast<int>(i);
  return static_cast<int>(probs.size()) - 1;
}

double TemperatureSchedule::at(std::uint64_t episode) const {
  if (horizon <= 1) return final;
  const double frac = std::min(1.0, static_cast<double>(episode) / static_cast<double>(horizon - 1));
  return initial + (final - initial) * frac;
}

}  // namespace pomfq
