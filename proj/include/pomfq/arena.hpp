#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pomfq/belief.hpp"
#include "pomfq/rng.hpp"

namespace pomfq {

enum class GameId : std::uint8_t { Multibattle = 0, BattleGathering = 1, PredatorPrey = 2 };

std::string_view to_string(GameId g);
GameId parse_game(std::string_view s);

inline constexpr int kNumActions = 21;
inline constexpr int kNumMoves = 13;
inline constexpr int kNumAttacks = 8;
inline constexpr std::size_t kMaxVisible = 20;
inline constexpr std::size_t kFoodSlots = 8;
inline constexpr std::size_t kSelfFeatures = 5;
inline constexpr std::size_t kSlotFeatures = 4 + kNumActions;

struct Cell {
  int x = 0;
  int y = 0;
  auto operator<=>(const Cell&) const = default;
};

/// Move offsets (actions 0..12) for an entity moving at `speed` cells/turn.
/// Speed 2 gives the 13 integer cells within radius 2; other speeds scale
/// that template and snap each offset to the nearest in-disc cell.
std::array<Cell, kNumMoves> move_offsets(double speed);
/// Attack directions (actions 13..20).
const std::array<Cell, kNumAttacks>& attack_directions();
bool is_attack(int action);

struct RoleSpec {
  int size = 1;
  double max_health = 10.0;
  double speed = 2.0;
  double view_range = 6.0;
  bool can_attack = true;
};

struct GameSpec {
  GameId game = GameId::Multibattle;
  std::array<std::size_t, 2> group_counts{25, 25};
  std::array<RoleSpec, 2> roles{};
  int width = 40;
  int height = 40;
  std::size_t food_count = 0;
  std::size_t max_steps = 500;
  double attack_damage = 2.0;
  std::uint64_t seed = 0;
};

GameSpec default_game_spec(GameId game);

struct Entity {
  int id = 0;
  int group = 0;
  Cell pos;  // top-left cell of the footprint
  int size = 1;
  double health = 0.0;
  double max_health = 0.0;
  bool alive = true;
  int last_action = -1;  // -1 until the entity has acted
  double speed = 2.0;
  double view_range = 6.0;
  bool can_attack = true;

  double center_x() const { return pos.x + 0.5 * size; }
  double center_y() const { return pos.y + 0.5 * size; }

  friend bool operator==(const Entity&, const Entity&) = default;
};

struct ArenaState {
  GameId game = GameId::Multibattle;
  int width = 0;
  int height = 0;
  std::vector<Entity> entities;
  std::vector<Cell> food;  // sorted
  std::uint64_t step = 0;
  std::size_t max_steps = 500;
  double attack_damage = 2.0;
  Rng rng;  // move order and PDO visibility draws

  std::size_t alive_count(int group) const;
  std::vector<int> group_members(int group) const;

  friend bool operator==(const ArenaState&, const ArenaState&) = default;
};

/// Places each group uniformly at random in its half of the map (group 0
/// left, group 1 right) and scatters food on free cells. Deterministic in
/// `spec.seed`. Throws ConfigError when placement is infeasible.
ArenaState make_game(const GameSpec& spec);

struct ObservationModel {
  enum class Mode : std::uint8_t { FOR = 0, PDO = 1 };
  Mode mode = Mode::FOR;
  std::optional<double> radius;  // FOR: overrides each entity's view range
  VisibilityModel visibility;    // PDO
};

struct Observation {
  std::vector<double> features;
  std::vector<int> visible_ids;
  std::vector<int> visible_actions;
  std::vector<double> visible_distances;
};

std::size_t observation_size(GameId game);
double entity_distance(const Entity& a, const Entity& b);

/// One distance-based visibility draw: true with probability lambda exp(-d lambda), capped at 1.
bool pdo_visible(double distance, const VisibilityModel& model, Rng& rng);

/// Local view of `agent`: self features, up to 20 visible-agent slots sorted by
/// (distance, id), and the nearest food for gathering games.
Observation observe(const ArenaState& state, int agent, const ObservationModel& model, Rng& rng);

struct RoleRewards {
  double step = 0.0;
  double needless_attack = 0.0;
  double hit = 0.0;
  double kill = 0.0;
  double attacked = 0.0;
  double dead = 0.0;
  double food = 0.0;

  friend bool operator==(const RoleRewards&, const RoleRewards&) = default;
};

struct RewardConfig {
  std::array<RoleRewards, 2> group;
};

RewardConfig reward_table(GameId game);
RewardConfig reward_table(std::string_view game);

enum class EventType : std::uint8_t { Step, NeedlessAttack, Hit, Attacked, Kill, Death, Food };
std::string_view to_string(EventType t);

struct Event {
  std::uint64_t step = 0;
  int agent = 0;
  EventType type = EventType::Step;
  double value = 0.0;
};

struct StepResult {
  std::vector<double> rewards;  // indexed by entity id
  bool done = false;
  std::array<int, 2> kills{0, 0};  // enemies killed by each group this step
  std::vector<Event> events;
};

/// Advances the world one turn. `actions` is indexed by entity id; entries
/// for dead entities are ignored. Order: simultaneous attacks against the
/// pre-step occupancy, deaths and kill credit, moves in random order,
/// food capture, per-step penalties.
StepResult step(ArenaState& state, std::span<const int> actions, bool record_events = false);

bool is_done(const ArenaState& state);

/// One line per event: "step agent type value".
void write_events(std::ostream& os, std::span<const Event> events);

/// Alive footprints are in bounds and pairwise disjoint.
bool occupancy_valid(const ArenaState& state);

}  // namespace pomfq
