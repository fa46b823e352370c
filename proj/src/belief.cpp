#include "pomfq/belief.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pomfq/errors.hpp"

namespace pomfq {

MeanActionBelief::MeanActionBelief(std::size_t num_actions, double prior)
    : concentration_(num_actions, prior) {
  if (num_actions < 2) throw ArgumentError("MeanActionBelief: need at least two actions");
  if (!(prior > 0.0)) throw ArgumentError("MeanActionBelief: prior concentration must be positive");
}

MeanActionBelief::MeanActionBelief(std::vector<double> concentration, std::uint64_t sample_count_total)
    : concentration_(std::move(concentration)), sample_count_total_(sample_count_total) {
  if (concentration_.size() < 2) throw ArgumentError("MeanActionBelief: need at least two actions");
  for (double c : concentration_)
    if (!(c > 0.0)) throw ArgumentError("MeanActionBelief: concentration must be positive");
}

MeanAction MeanActionBelief::mean() const {
  const double total = std::accumulate(concentration_.begin(), concentration_.end(), 0.0);
  MeanAction m(concentration_.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = concentration_[i] / total;
  return m;
}

void MeanActionBelief::update(std::span<const std::uint32_t> counts, double decay) {
  if (counts.size() != concentration_.size())
    throw DimensionError("dirichlet_update: counts length does not match the action space");
  if (!(decay > 0.0 && decay <= 1.0)) throw ArgumentError("dirichlet_update: decay must be in (0, 1]");
  for (std::size_t i = 0; i < counts.size(); ++i) {
    concentration_[i] = std::max(decay * concentration_[i] + counts[i], kConcentrationFloor);
    sample_count_total_ += counts[i];
  }
}

MeanActionBelief dirichlet_update(MeanActionBelief belief, std::span<const std::uint32_t> counts,
                                  double decay) {
  belief.update(counts, decay);
  return belief;
}

std::vector<std::uint32_t> action_counts(std::span<const int> actions, std::size_t num_actions) {
  std::vector<std::uint32_t> counts(num_actions, 0);
  for (int a : actions) {
    if (a < 0) continue;
    if (static_cast<std::size_t>(a) >= num_actions) throw DimensionError("action_counts: action index out of range");
    ++counts[static_cast<std::size_t>(a)];
  }
  return counts;
}

MeanAction sample_mean_action(const MeanActionBelief& belief, std::size_t samples, Rng& rng) {
  if (samples == 0) throw ArgumentError("sample_mean_action: need at least one sample");
  const auto eta = belief.concentration();
  const std::size_t n = eta.size();
  MeanAction acc(n, 0.0);
  std::vector<double> draw(n);
  for (std::size_t s = 0; s < samples; ++s) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      draw[i] = rng.gamma(eta[i]);
      total += draw[i];
    }
    if (!(total > 0.0)) {
      // Every draw underflowed (all concentrations tiny); fall back to the mean.
      const MeanAction m = belief.mean();
      for (std::size_t i = 0; i < n; ++i) acc[i] += m[i];
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) acc[i] += draw[i] / total;
  }
  double sum = 0.0;
  for (double& a : acc) {
    a /= static_cast<double>(samples);
    sum += a;
  }
  // Renormalize away accumulated rounding so the estimate stays on the simplex.
  for (double& a : acc) a /= sum;
  return acc;
}

std::optional<MeanAction> frequentist_mean_action(std::span<const std::vector<double>> one_hots) {
  if (one_hots.empty()) return std::nullopt;
  const std::size_t n = one_hots.front().size();
  MeanAction mean(n, 0.0);
  for (const auto& v : one_hots) {
    if (v.size() != n) throw DimensionError("frequentist_mean_action: ragged one-hot vectors");
    for (std::size_t i = 0; i < n; ++i) mean[i] += v[i];
  }
  for (double& m : mean) m /= static_cast<double>(one_hots.size());
  return mean;
}

std::optional<MeanAction> frequentist_mean_action(std::span<const int> actions, std::size_t num_actions) {
  const auto counts = action_counts(actions, num_actions);
  const auto total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (total == 0) return std::nullopt;
  MeanAction mean(num_actions);
  for (std::size_t i = 0; i < num_actions; ++i) mean[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  return mean;
}

VisibilityBelief make_visibility_prior(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) throw ArgumentError("visibility prior: shape and rate must be positive");
  return VisibilityBelief{shape, rate, shape / rate, shape / rate};
}

VisibilityBelief gamma_posterior_update(VisibilityBelief belief, double distance) {
  if (!(distance >= 0.0)) throw ArgumentError("gamma_posterior_update: distance must be nonnegative");
  belief.shape += 0.5;
  belief.rate = std::max(belief.rate + distance - distance / belief.point_estimate, kRateFloor);
  belief.point_estimate = belief.shape / belief.rate;
  return belief;
}

double sample_lambda(const VisibilityBelief& belief, std::size_t samples, Rng& rng) {
  if (samples == 0) throw ArgumentError("sample_lambda: need at least one sample");
  double acc = 0.0;
  for (std::size_t i = 0; i < samples; ++i) acc += rng.gamma(belief.shape) / belief.rate;
  const double mean = acc / static_cast<double>(samples);
  // Gamma draws can underflow to zero for tiny shapes; the rate must stay positive.
  return mean > 0.0 ? mean : std::numeric_limits<double>::denorm_min();
}

double visibility_prob(double distance, const VisibilityModel& model) {
  return model.lambda * std::exp(-distance * model.lambda);
}

double hoeffding_bound(std::uint64_t n, double delta) {
  if (n == 0) throw ArgumentError("hoeffding_bound: n must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("hoeffding_bound: delta must be in (0, 1)");
  return std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(n)));
}

}  // namespace pomfq
