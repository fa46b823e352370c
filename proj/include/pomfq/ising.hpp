#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pomfq/backend.hpp"
#include "pomfq/rng.hpp"

namespace pomfq {

/// Spins on a side x side torus; spin 0 is "up", 1 is "down".
struct IsingState {
  std::size_t side = 10;
  std::vector<int> spins;
  double temperature = 0.8;

  std::size_t size() const { return side * side; }
  std::array<std::size_t, 4> neighbors(std::size_t site) const;
};

IsingState make_ising(std::size_t side, double temperature, Rng& rng);

/// Stage reward for a site whose `same_direction` neighbors (0..4) share its spin: -2 + count.
double ising_reward(int same_direction);

/// Replaces the spins with `joint` and returns each site's stage reward.
std::vector<double> ising_step(IsingState& state, std::span<const int> joint);

/// Stage values of the aligned equilibrium, obtained by auditing a single
/// agent's two replies against an all-aligned field.
struct NashReference {
  double aligned = 0.0;
  double deviate = 0.0;
  bool equilibrium = false;  // no unilateral deviation improves the stage reward
};

NashReference nash_q_reference();

struct BoundEstimate {
  double z = 0.0;  // L ln(2/δ) / (2n), with the mean-action Lipschitz constant taken as 1
  double k = 0.0;  // action-gap constant; k·sqrt(2) is the largest action-value gap in the table
  double d = 0.0;  // z + k·sqrt(2)
};

BoundEstimate estimate_bound_D(const TabularQ& table, std::uint64_t n, double delta);

struct IsingConfig {
  std::size_t side = 10;
  double temperature = 0.8;  // fixed Boltzmann temperature of the learners
  std::uint64_t episodes = 2000;
  std::size_t stages_per_episode = 1;
  std::size_t dirichlet_samples = 10000;
  double alpha = 0.1;
  double delta = 0.95;
  std::size_t batch_size = 64;
  std::size_t replay_capacity = 1024;
  std::size_t mean_action_bins = 32;
  std::uint64_t seed = 0;
};

struct BoundReport {
  BoundEstimate bound;              // from the final tables
  std::vector<double> mse;          // per episode, measured before the episode's stages
  std::vector<double> d_trajectory; // D per episode, same timing
  double final_mse = 0.0;           // after the last episode
};

/// Mean over sites of the mean squared difference between the learned stage
/// values and the aligned-equilibrium values. The aligned action of a site is
/// its neighbor majority (ties: its own spin).
double nash_mse(const IsingState& state, std::span<const std::vector<double>> site_qvalues);

/// Tabular POMFQ-FOR on the stateless Ising stage game with one shared table
/// and per-site Dirichlet beliefs over the four neighbors' actions.
BoundReport run_ising_pomfq(const IsingConfig& config);

/// Centered moving average with the window truncated at the ends.
std::vector<double> smooth(std::span<const double> values, std::size_t window);

}  // namespace pomfq
