#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pomfq/rng.hpp"

namespace pomfq {

inline constexpr double kConcentrationFloor = 1e-6;
inline constexpr double kRateFloor = 1e-6;

/// A point on the action simplex: nonnegative components summing to one.
using MeanAction = std::vector<double>;

/// Dirichlet posterior over the categorical distribution of other agents'
/// actions. Starts from a symmetric prior and absorbs observed action counts.
class MeanActionBelief {
 public:
  explicit MeanActionBelief(std::size_t num_actions, double prior = 1.0);
  explicit MeanActionBelief(std::vector<double> concentration, std::uint64_t sample_count_total = 0);

  std::size_t num_actions() const { return concentration_.size(); }
  std::span<const double> concentration() const { return concentration_; }
  std::uint64_t sample_count_total() const { return sample_count_total_; }

  /// Posterior mean eta / |eta|_1.
  MeanAction mean() const;

  /// eta_i <- max(decay * eta_i + c_i, floor). decay = 1 is exact conjugate addition.
  void update(std::span<const std::uint32_t> counts, double decay = 1.0);

  friend bool operator==(const MeanActionBelief&, const MeanActionBelief&) = default;

 private:
  std::vector<double> concentration_;
  std::uint64_t sample_count_total_ = 0;
};

MeanActionBelief dirichlet_update(MeanActionBelief belief, std::span<const std::uint32_t> counts,
                                  double decay = 1.0);

/// Histogram of action indices; negative entries (no action yet) are skipped.
std::vector<std::uint32_t> action_counts(std::span<const int> actions, std::size_t num_actions);

/// Average of `samples` independent Dirichlet draws, each drawn as
/// normalized Gamma(eta_i, 1) variates.
MeanAction sample_mean_action(const MeanActionBelief& belief, std::size_t samples, Rng& rng);

/// Arithmetic mean of one-hot action vectors. Returns nullopt for an empty
/// observation set so the caller can keep its previous estimate.
std::optional<MeanAction> frequentist_mean_action(std::span<const std::vector<double>> one_hots);
std::optional<MeanAction> frequentist_mean_action(std::span<const int> actions, std::size_t num_actions);

/// Gamma belief over the distance rate, with the plug-in point estimate used
/// inside the rate update and the most recently sampled rate lambda_bar.
struct VisibilityBelief {
  double shape = 1.0;
  double rate = 1.0;
  double point_estimate = 1.0;
  double lambda_bar = 1.0;

  friend bool operator==(const VisibilityBelief&, const VisibilityBelief&) = default;
};

VisibilityBelief make_visibility_prior(double shape = 1.0, double rate = 1.0);

/// Projected single-Gamma update for one visible agent at distance d:
/// shape + 0.5, rate = max(rate + d - d / point_estimate, floor),
/// point_estimate = shape' / rate'.
VisibilityBelief gamma_posterior_update(VisibilityBelief belief, double distance);

/// Mean of `samples` Gamma(shape, rate) draws.
double sample_lambda(const VisibilityBelief& belief, std::size_t samples, Rng& rng);

struct VisibilityModel {
  double lambda = 1.0;
};

/// Probability lambda * exp(-d * lambda) that an agent at distance d is seen.
double visibility_prob(double distance, const VisibilityModel& model = {});

/// sqrt(ln(2 / delta) / (2 n)).
double hoeffding_bound(std::uint64_t n, double delta);

}  // namespace pomfq
