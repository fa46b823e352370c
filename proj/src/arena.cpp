#include "pomfq/arena.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "pomfq/errors.hpp"

namespace pomfq {

namespace {

constexpr std::array<Cell, kNumMoves> kMoveTemplate{{{0, 0},
                                                      {1, 0},
                                                      {-1, 0},
                                                      {0, 1},
                                                      {0, -1},
                                                      {1, 1},
                                                      {1, -1},
                                                      {-1, 1},
                                                      {-1, -1},
                                                      {2, 0},
                                                      {-2, 0},
                                                      {0, 2},
                                                      {0, -2}}};

constexpr std::array<Cell, kNumAttacks> kAttackDirs{
    {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};

constexpr int kEmpty = -1;

class Occupancy {
 public:
  Occupancy(int width, int height) : width_(width), height_(height), cells_(static_cast<std::size_t>(width * height), kEmpty) {}

  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
  int at(int x, int y) const { return in_bounds(x, y) ? cells_[index(x, y)] : kEmpty; }

  void fill(const Entity& e, int value) {
    for (int dy = 0; dy < e.size; ++dy)
      for (int dx = 0; dx < e.size; ++dx) cells_[index(e.pos.x + dx, e.pos.y + dy)] = value;
  }

  bool footprint_free(Cell pos, int size, int self) const {
    for (int dy = 0; dy < size; ++dy)
      for (int dx = 0; dx < size; ++dx) {
        const int x = pos.x + dx;
        const int y = pos.y + dy;
        if (!in_bounds(x, y)) return false;
        const int occ = cells_[index(x, y)];
        if (occ != kEmpty && occ != self) return false;
      }
    return true;
  }

 private:
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y * width_ + x); }
  int width_;
  int height_;
  std::vector<int> cells_;
};

Occupancy build_occupancy(const ArenaState& state) {
  Occupancy occ(state.width, state.height);
  for (const auto& e : state.entities)
    if (e.alive) occ.fill(e, e.id);
  return occ;
}

Cell attack_target(const Entity& e, Cell dir) {
  const int tx = dir.x < 0 ? e.pos.x - 1 : dir.x > 0 ? e.pos.x + e.size : e.pos.x;
  const int ty = dir.y < 0 ? e.pos.y - 1 : dir.y > 0 ? e.pos.y + e.size : e.pos.y;
  return {tx, ty};
}

}  // namespace

std::string_view to_string(GameId g) {
  switch (g) {
    case GameId::Multibattle: return "multibattle";
    case GameId::BattleGathering: return "battle_gathering";
    case GameId::PredatorPrey: return "predator_prey";
  }
  return "?";
}

GameId parse_game(std::string_view s) {
  if (s == "multibattle") return GameId::Multibattle;
  if (s == "battle_gathering") return GameId::BattleGathering;
  if (s == "predator_prey") return GameId::PredatorPrey;
  throw ArgumentError("unknown game '" + std::string(s) + "'");
}

std::array<Cell, kNumMoves> move_offsets(double speed) {
  if (!(speed > 0.0)) throw ArgumentError("move_offsets: speed must be positive");
  std::array<Cell, kNumMoves> out{};
  const double scale = speed / 2.0;
  const int reach = static_cast<int>(std::floor(speed));
  for (std::size_t i = 0; i < kNumMoves; ++i) {
    const double tx = kMoveTemplate[i].x * scale;
    const double ty = kMoveTemplate[i].y * scale;
    Cell best{0, 0};
    double best_d = std::numeric_limits<double>::infinity();
    // Candidates scanned in a fixed order so ties resolve the same way everywhere.
    for (int y = -reach; y <= reach; ++y)
      for (int x = -reach; x <= reach; ++x) {
        if (x * x + y * y > speed * speed) continue;
        const double d = (x - tx) * (x - tx) + (y - ty) * (y - ty);
        const bool closer = d < best_d - 1e-12;
        const bool tie_shorter = std::abs(d - best_d) <= 1e-12 && (x * x + y * y) < (best.x * best.x + best.y * best.y);
        if (closer || tie_shorter) {
          best = {x, y};
          best_d = d;
        }
      }
    out[i] = best;
  }
  return out;
}

const std::array<Cell, kNumAttacks>& attack_directions() { return kAttackDirs; }

bool is_attack(int action) { return action >= kNumMoves && action < kNumActions; }

GameSpec default_game_spec(GameId game) {
  GameSpec spec;
  spec.game = game;
  switch (game) {
    case GameId::Multibattle:
      spec.group_counts = {25, 25};
      spec.roles = {RoleSpec{1, 10.0, 2.0, 6.0, true}, RoleSpec{1, 10.0, 2.0, 6.0, true}};
      spec.width = spec.height = 40;
      break;
    case GameId::BattleGathering:
      spec.group_counts = {25, 25};
      spec.roles = {RoleSpec{1, 10.0, 2.0, 6.0, true}, RoleSpec{1, 10.0, 2.0, 6.0, true}};
      spec.width = spec.height = 40;
      spec.food_count = 100;
      break;
    case GameId::PredatorPrey:
      spec.group_counts = {20, 40};
      spec.roles = {RoleSpec{2, 10.0, 2.0, 7.0, true}, RoleSpec{1, 2.0, 2.5, 6.0, false}};
      spec.width = spec.height = 45;
      break;
  }
  return spec;
}

std::size_t ArenaState::alive_count(int group) const {
  return static_cast<std::size_t>(
      std::count_if(entities.begin(), entities.end(), [&](const Entity& e) { return e.alive && e.group == group; }));
}

std::vector<int> ArenaState::group_members(int group) const {
  std::vector<int> ids;
  for (const auto& e : entities)
    if (e.group == group) ids.push_back(e.id);
  return ids;
}

ArenaState make_game(const GameSpec& spec) {
  if (spec.width <= 0 || spec.height <= 0) throw ConfigError("map", "map dimensions must be positive");
  ArenaState state;
  state.game = spec.game;
  state.width = spec.width;
  state.height = spec.height;
  state.max_steps = spec.max_steps;
  state.attack_damage = spec.attack_damage;
  state.rng = Rng(spec.seed);

  Occupancy occ(spec.width, spec.height);
  const int half = spec.width / 2;
  constexpr int kAttempts = 10000;
  int next_id = 0;
  for (int g = 0; g < 2; ++g) {
    const RoleSpec& role = spec.roles[static_cast<std::size_t>(g)];
    const int x_lo = g == 0 ? 0 : half;
    const int x_hi = (g == 0 ? half : spec.width) - role.size;  // inclusive
    const int y_hi = spec.height - role.size;
    if (x_hi < x_lo || y_hi < 0) throw ConfigError("map", "map too small for agent footprint");
    for (std::size_t i = 0; i < spec.group_counts[static_cast<std::size_t>(g)]; ++i) {
      Entity e;
      e.id = next_id++;
      e.group = g;
      e.size = role.size;
      e.health = e.max_health = role.max_health;
      e.speed = role.speed;
      e.view_range = role.view_range;
      e.can_attack = role.can_attack;
      bool placed = false;
      for (int attempt = 0; attempt < kAttempts && !placed; ++attempt) {
        e.pos = {x_lo + static_cast<int>(state.rng.uniform_index(static_cast<std::uint64_t>(x_hi - x_lo + 1))),
                 static_cast<int>(state.rng.uniform_index(static_cast<std::uint64_t>(y_hi + 1)))};
        placed = occ.footprint_free(e.pos, e.size, e.id);
      }
      if (!placed)
        throw ConfigError("agents_group_" + std::string(g == 0 ? "a" : "b"),
                          "cannot place agents without overlap on a " + std::to_string(spec.width) + "x" +
                              std::to_string(spec.height) + " map");
      occ.fill(e, e.id);
      state.entities.push_back(e);
    }
  }

  if (spec.food_count > 0) {
    std::vector<Cell> free;
    for (int y = 0; y < spec.height; ++y)
      for (int x = 0; x < spec.width; ++x)
        if (occ.at(x, y) == kEmpty) free.push_back({x, y});
    if (free.size() < spec.food_count) throw ConfigError("food_count", "not enough free cells for food");
    // Partial Fisher-Yates: the first food_count cells are a uniform sample.
    for (std::size_t i = 0; i < spec.food_count; ++i) {
      const auto j = i + static_cast<std::size_t>(state.rng.uniform_index(free.size() - i));
      std::swap(free[i], free[j]);
    }
    state.food.assign(free.begin(), free.begin() + static_cast<std::ptrdiff_t>(spec.food_count));
    std::sort(state.food.begin(), state.food.end());
  }
  return state;
}

std::size_t observation_size(GameId game) {
  return kSelfFeatures + kMaxVisible * kSlotFeatures + (game == GameId::BattleGathering ? 2 * kFoodSlots : 0);
}

double entity_distance(const Entity& a, const Entity& b) {
  return std::hypot(a.center_x() - b.center_x(), a.center_y() - b.center_y());
}

bool pdo_visible(double distance, const VisibilityModel& model, Rng& rng) {
  return rng.bernoulli(std::min(1.0, visibility_prob(distance, model)));
}

Observation observe(const ArenaState& state, int agent, const ObservationModel& model, Rng& rng) {
  if (agent < 0 || static_cast<std::size_t>(agent) >= state.entities.size())
    throw ArgumentError("observe: agent id out of range");
  const Entity& self = state.entities[static_cast<std::size_t>(agent)];
  if (!self.alive) throw StateError("observe: agent " + std::to_string(agent) + " is dead");

  struct Candidate {
    double distance;
    int id;
  };
  std::vector<Candidate> seen;
  const double radius = model.radius.value_or(self.view_range);
  for (const auto& other : state.entities) {
    if (!other.alive || other.id == self.id) continue;
    const double d = entity_distance(self, other);
    bool visible = false;
    if (model.mode == ObservationModel::Mode::FOR) {
      visible = d <= radius;
    } else {
      visible = pdo_visible(d, model.visibility, rng);
    }
    if (visible) seen.push_back({d, other.id});
  }
  std::sort(seen.begin(), seen.end(),
            [](const Candidate& a, const Candidate& b) { return a.distance < b.distance || (a.distance == b.distance && a.id < b.id); });
  if (seen.size() > kMaxVisible) seen.resize(kMaxVisible);

  const double w = state.width;
  const double h = state.height;
  Observation obs;
  obs.features.assign(observation_size(state.game), 0.0);
  auto& f = obs.features;
  f[0] = self.center_x() / w;
  f[1] = self.center_y() / h;
  f[2] = self.size / std::max(w, h);
  f[3] = self.health / self.max_health;
  f[4] = static_cast<double>(self.group);

  for (std::size_t s = 0; s < seen.size(); ++s) {
    const Entity& other = state.entities[static_cast<std::size_t>(seen[s].id)];
    const std::size_t base = kSelfFeatures + s * kSlotFeatures;
    f[base + 0] = (other.center_x() - self.center_x()) / w;
    f[base + 1] = (other.center_y() - self.center_y()) / h;
    f[base + 2] = other.health / other.max_health;
    f[base + 3] = other.group == self.group ? 1.0 : 0.0;
    if (other.last_action >= 0) f[base + 4 + static_cast<std::size_t>(other.last_action)] = 1.0;
    obs.visible_ids.push_back(other.id);
    obs.visible_actions.push_back(other.last_action);
    obs.visible_distances.push_back(seen[s].distance);
  }

  if (state.game == GameId::BattleGathering) {
    std::vector<std::pair<double, Cell>> near;
    near.reserve(state.food.size());
    for (const Cell& c : state.food)
      near.push_back({std::hypot(c.x + 0.5 - self.center_x(), c.y + 0.5 - self.center_y()), c});
    const std::size_t k = std::min(kFoodSlots, near.size());
    std::partial_sort(near.begin(), near.begin() + static_cast<std::ptrdiff_t>(k), near.end());
    const std::size_t base = kSelfFeatures + kMaxVisible * kSlotFeatures;
    for (std::size_t i = 0; i < k; ++i) {
      f[base + 2 * i] = (near[i].second.x + 0.5 - self.center_x()) / w;
      f[base + 2 * i + 1] = (near[i].second.y + 0.5 - self.center_y()) / h;
    }
  }
  return obs;
}

RewardConfig reward_table(GameId game) {
  RewardConfig cfg;
  switch (game) {
    case GameId::Multibattle: {
      const RoleRewards r{.step = -0.005, .needless_attack = -0.1, .hit = 0.2, .kill = 200.0};
      cfg.group = {r, r};
      break;
    }
    case GameId::BattleGathering: {
      const RoleRewards r{.step = -0.005, .needless_attack = -0.1, .hit = 0.2, .kill = 5.0, .food = 80.0};
      cfg.group = {r, r};
      break;
    }
    case GameId::PredatorPrey:
      cfg.group[0] = RoleRewards{.needless_attack = -0.3, .hit = 1.0, .kill = 100.0};
      cfg.group[1] = RoleRewards{.attacked = -1.0, .dead = -0.5};
      break;
  }
  return cfg;
}

RewardConfig reward_table(std::string_view game) { return reward_table(parse_game(game)); }

std::string_view to_string(EventType t) {
  switch (t) {
    case EventType::Step: return "step";
    case EventType::NeedlessAttack: return "needless_attack";
    case EventType::Hit: return "hit";
    case EventType::Attacked: return "attacked";
    case EventType::Kill: return "kill";
    case EventType::Death: return "death";
    case EventType::Food: return "food";
  }
  return "?";
}

bool is_done(const ArenaState& state) {
  return state.alive_count(0) == 0 || state.alive_count(1) == 0 || state.step >= state.max_steps;
}

StepResult step(ArenaState& state, std::span<const int> actions, bool record_events) {
  const std::size_t n = state.entities.size();
  if (actions.size() != n) throw ArgumentError("step: action map must have one entry per entity");
  for (const auto& e : state.entities)
    if (e.alive && (actions[static_cast<std::size_t>(e.id)] < 0 || actions[static_cast<std::size_t>(e.id)] >= kNumActions))
      throw ArgumentError("step: invalid action for agent " + std::to_string(e.id));

  const RewardConfig table = reward_table(state.game);
  StepResult result;
  result.rewards.assign(n, 0.0);
  auto emit = [&](int agent, EventType type, double value) {
    if (value == 0.0 && type != EventType::Death && type != EventType::Kill) return;
    result.rewards[static_cast<std::size_t>(agent)] += value;
    if (record_events) result.events.push_back({state.step, agent, type, value});
  };
  auto role = [&](const Entity& e) -> const RoleRewards& { return table.group[static_cast<std::size_t>(e.group)]; };

  std::vector<char> acting(n, 0);
  for (const auto& e : state.entities) acting[static_cast<std::size_t>(e.id)] = e.alive ? 1 : 0;

  // (1) attacks against pre-step occupancy
  Occupancy occ = build_occupancy(state);
  std::vector<double> damage(n, 0.0);
  std::vector<std::vector<int>> hitters(n);
  for (const auto& e : state.entities) {
    if (!e.alive) continue;
    const int a = actions[static_cast<std::size_t>(e.id)];
    if (!is_attack(a) || !e.can_attack) continue;
    const Cell target = attack_target(e, kAttackDirs[static_cast<std::size_t>(a - kNumMoves)]);
    const int victim = occ.at(target.x, target.y);
    if (victim == kEmpty) {
      emit(e.id, EventType::NeedlessAttack, role(e).needless_attack);
      continue;
    }
    const Entity& v = state.entities[static_cast<std::size_t>(victim)];
    if (v.group == e.group) continue;  // allies are not damaged
    damage[static_cast<std::size_t>(victim)] += state.attack_damage;
    hitters[static_cast<std::size_t>(victim)].push_back(e.id);
    emit(e.id, EventType::Hit, role(e).hit);
    emit(victim, EventType::Attacked, role(v).attacked);
  }

  // (2) deaths and kill credit
  for (auto& v : state.entities) {
    const auto vi = static_cast<std::size_t>(v.id);
    if (!v.alive || damage[vi] == 0.0) continue;
    v.health = std::max(0.0, v.health - damage[vi]);
    if (v.health > 0.0) continue;
    v.alive = false;
    emit(v.id, EventType::Death, role(v).dead);
    const auto& killers = hitters[vi];
    const double share = 1.0 / static_cast<double>(killers.size());
    for (int k : killers) emit(k, EventType::Kill, role(state.entities[static_cast<std::size_t>(k)]).kill * share);
    ++result.kills[static_cast<std::size_t>(1 - v.group)];
    occ.fill(v, kEmpty);
  }

  // (3) moves in seeded random order; (4) food capture on entry
  std::vector<int> order;
  for (const auto& e : state.entities)
    if (e.alive && actions[static_cast<std::size_t>(e.id)] < kNumMoves) order.push_back(e.id);
  for (std::size_t i = order.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(state.rng.uniform_index(i));
    std::swap(order[i - 1], order[j]);
  }
  for (int id : order) {
    Entity& e = state.entities[static_cast<std::size_t>(id)];
    const Cell off = move_offsets(e.speed)[static_cast<std::size_t>(actions[static_cast<std::size_t>(id)])];
    if (off.x == 0 && off.y == 0) continue;
    const Cell dest{e.pos.x + off.x, e.pos.y + off.y};
    if (!occ.footprint_free(dest, e.size, e.id)) continue;
    occ.fill(e, kEmpty);
    e.pos = dest;
    occ.fill(e, e.id);
    if (state.food.empty()) continue;
    for (int dy = 0; dy < e.size; ++dy)
      for (int dx = 0; dx < e.size; ++dx) {
        const Cell c{e.pos.x + dx, e.pos.y + dy};
        const auto it = std::lower_bound(state.food.begin(), state.food.end(), c);
        if (it != state.food.end() && *it == c) {
          state.food.erase(it);
          emit(e.id, EventType::Food, role(e).food);
        }
      }
  }

  // (5) per-step penalty for everyone who started the step alive
  for (const auto& e : state.entities)
    if (acting[static_cast<std::size_t>(e.id)]) emit(e.id, EventType::Step, role(e).step);

  for (auto& e : state.entities)
    if (acting[static_cast<std::size_t>(e.id)]) e.last_action = actions[static_cast<std::size_t>(e.id)];
  ++state.step;
  result.done = is_done(state);
  return result;
}

void write_events(std::ostream& os, std::span<const Event> events) {
  for (const auto& e : events) os << e.step << ' ' << e.agent << ' ' << to_string(e.type) << ' ' << e.value << '\n';
}

bool occupancy_valid(const ArenaState& state) {
  std::vector<int> cells(static_cast<std::size_t>(state.width * state.height), kEmpty);
  for (const auto& e : state.entities) {
    if (!e.alive) continue;
    for (int dy = 0; dy < e.size; ++dy)
      for (int dx = 0; dx < e.size; ++dx) {
        const int x = e.pos.x + dx;
        const int y = e.pos.y + dy;
        if (x < 0 || y < 0 || x >= state.width || y >= state.height) return false;
        int& c = cells[static_cast<std::size_t>(y * state.width + x)];
        if (c != kEmpty) return false;
        c = e.id;
      }
  }
  return true;
}

}  // namespace pomfq
