#include "pomfq/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "pomfq/errors.hpp"
#include "pomfq/serialize.hpp"

namespace pomfq {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::uint64_t parse_u64(const std::string& key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key, "expected a nonnegative integer, got '" + std::string(v) + "'");
  return out;
}

double parse_f64(const std::string& key, std::string_view v) {
  // from_chars for double is missing in older standard libraries.
  std::string s(v);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(out)) throw ConfigError(key, "expected a number, got '" + s + "'");
  return out;
}

ObservationModel::Mode parse_mode(const std::string& key, std::string_view v) {
  if (v == "for") return ObservationModel::Mode::FOR;
  if (v == "pdo") return ObservationModel::Mode::PDO;
  throw ConfigError(key, "expected 'for' or 'pdo'");
}

std::vector<std::size_t> parse_list(const std::string& key, std::string_view v) {
  std::vector<std::size_t> out;
  while (!v.empty()) {
    const auto comma = v.find(',');
    out.push_back(parse_u64(key, trim(v.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  if (out.empty()) throw ConfigError(key, "expected a comma-separated list");
  return out;
}

template <class F>
auto wrap(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ArgumentError& e) {
    throw ConfigError(key, e.what());
  }
}

// Shortest text that reads back to the same double.
std::string fmt(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

using Setter = std::function<void(RunConfig&, const std::string&, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"for_radius_cells", [](RunConfig& c, const std::string& k, std::string_view v) { c.for_radius_cells = parse_f64(k, v); }},
      {"pdo_lambda", [](RunConfig& c, const std::string& k, std::string_view v) { c.pdo_lambda = parse_f64(k, v); }},
      {"algorithm",
       [](RunConfig& c, const std::string& k, std::string_view v) {
         c.algorithm[0] = c.algorithm[1] = wrap(k, [&] { return parse_algorithm(v); });
       }},
      {"algorithm_group_a",
       [](RunConfig& c, const std::string& k, std::string_view v) { c.algorithm[0] = wrap(k, [&] { return parse_algorithm(v); }); }},
      {"algorithm_group_b",
       [](RunConfig& c, const std::string& k, std::string_view v) { c.algorithm[1] = wrap(k, [&] { return parse_algorithm(v); }); }},
      {"episodes", [](RunConfig& c, const std::string& k, std::string_view v) { c.episodes = parse_u64(k, v); }},
      {"max_steps", [](RunConfig& c, const std::string& k, std::string_view v) { c.max_steps = parse_u64(k, v); }},
      {"agents_group_a", [](RunConfig& c, const std::string& k, std::string_view v) { c.agents[0] = parse_u64(k, v); }},
      {"agents_group_b", [](RunConfig& c, const std::string& k, std::string_view v) { c.agents[1] = parse_u64(k, v); }},
      {"map_width_cells",
       [](RunConfig& c, const std::string& k, std::string_view v) { c.map_width_cells = static_cast<int>(parse_u64(k, v)); }},
      {"map_height_cells",
       [](RunConfig& c, const std::string& k, std::string_view v) { c.map_height_cells = static_cast<int>(parse_u64(k, v)); }},
      {"food_count", [](RunConfig& c, const std::string& k, std::string_view v) { c.food_count = parse_u64(k, v); }},
      {"backend",
       [](RunConfig& c, const std::string& k, std::string_view v) { c.backend = wrap(k, [&] { return parse_backend(v); }); }},
      {"learning_rate", [](RunConfig& c, const std::string& k, std::string_view v) { c.learning_rate = parse_f64(k, v); }},
      {"tabular_alpha", [](RunConfig& c, const std::string& k, std::string_view v) { c.tabular_alpha = parse_f64(k, v); }},
      {"discount", [](RunConfig& c, const std::string& k, std::string_view v) { c.discount = parse_f64(k, v); }},
      {"replay_capacity", [](RunConfig& c, const std::string& k, std::string_view v) { c.replay_capacity = parse_u64(k, v); }},
      {"batch_size", [](RunConfig& c, const std::string& k, std::string_view v) { c.batch_size = parse_u64(k, v); }},
      {"mean_action_samples",
       [](RunConfig& c, const std::string& k, std::string_view v) { c.mean_action_samples = parse_u64(k, v); }},
      {"lambda_samples", [](RunConfig& c, const std::string& k, std::string_view v) { c.lambda_samples = parse_u64(k, v); }},
      {"temperature_initial",
       [](RunConfig& c, const std::string& k, std::string_view v) { c.temperature_initial = parse_f64(k, v); }},
      {"temperature_final",
       [](RunConfig& c, const std::string& k, std::string_view v) { c.temperature_final = parse_f64(k, v); }},
      {"soft_update_tau", [](RunConfig& c, const std::string& k, std::string_view v) { c.soft_update_tau = parse_f64(k, v); }},
      {"count_decay", [](RunConfig& c, const std::string& k, std::string_view v) { c.count_decay = parse_f64(k, v); }},
      {"hidden_units", [](RunConfig& c, const std::string& k, std::string_view v) { c.hidden_units = parse_list(k, v); }},
      {"seed", [](RunConfig& c, const std::string& k, std::string_view v) { c.seed = parse_u64(k, v); }},
      {"replicas", [](RunConfig& c, const std::string& k, std::string_view v) { c.replicas = parse_u64(k, v); }},
  };
  return table;
}

}  // namespace

RunConfig default_run_config(GameId game, ObservationModel::Mode mode) {
  const GameSpec spec = default_game_spec(game);
  RunConfig c;
  c.game = game;
  c.observation = mode;
  c.agents = spec.group_counts;
  c.map_width_cells = spec.width;
  c.map_height_cells = spec.height;
  c.food_count = spec.food_count;
  c.max_steps = spec.max_steps;
  c.episodes = mode == ObservationModel::Mode::FOR ? 3000 : 2000;
  c.for_radius_cells = game == GameId::PredatorPrey ? 0.0 : 6.0;
  const Algorithm a = mode == ObservationModel::Mode::FOR ? Algorithm::POMFQ_FOR : Algorithm::POMFQ_PDO;
  c.algorithm = {a, a};
  return c;
}

RunConfig parse_run_config(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::map<std::string, std::size_t, std::less<>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("", "line " + std::to_string(line_no) + ": expected key = value");
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("", "line " + std::to_string(line_no) + ": empty key");
    if (key != "game" && key != "observation" && !setters().contains(key)) throw ConfigError(key, "unknown key");
    if (seen.contains(key)) throw ConfigError(key, "duplicate key");
    seen.emplace(key, line_no);
    entries.emplace_back(std::move(key), std::move(value));
  }

  GameId game = GameId::Multibattle;
  ObservationModel::Mode mode = ObservationModel::Mode::FOR;
  for (const auto& [k, v] : entries) {
    if (k == "game") game = wrap(k, [&] { return parse_game(v); });
    if (k == "observation") mode = parse_mode(k, v);
  }
  RunConfig c = default_run_config(game, mode);
  for (const auto& [k, v] : entries)
    if (auto it = setters().find(k); it != setters().end()) it->second(c, k, v);
  validate(c);
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

void validate(const RunConfig& c) {
  auto positive = [](const char* key, double v) {
    if (!(v > 0.0)) throw ConfigError(key, "must be positive");
  };
  if (c.for_radius_cells < 0.0) throw ConfigError("for_radius_cells", "must be nonnegative");
  positive("pdo_lambda", c.pdo_lambda);
  positive("max_steps", static_cast<double>(c.max_steps));
  positive("agents_group_a", static_cast<double>(c.agents[0]));
  positive("agents_group_b", static_cast<double>(c.agents[1]));
  positive("map_width_cells", c.map_width_cells);
  positive("map_height_cells", c.map_height_cells);
  positive("learning_rate", c.learning_rate);
  if (!(c.tabular_alpha > 0.0 && c.tabular_alpha <= 1.0)) throw ConfigError("tabular_alpha", "must be in (0, 1]");
  if (!(c.discount >= 0.0 && c.discount < 1.0)) throw ConfigError("discount", "must be in [0, 1)");
  positive("replay_capacity", static_cast<double>(c.replay_capacity));
  positive("batch_size", static_cast<double>(c.batch_size));
  positive("mean_action_samples", static_cast<double>(c.mean_action_samples));
  positive("lambda_samples", static_cast<double>(c.lambda_samples));
  positive("temperature_initial", c.temperature_initial);
  positive("temperature_final", c.temperature_final);
  if (!(c.soft_update_tau >= 0.0 && c.soft_update_tau <= 1.0)) throw ConfigError("soft_update_tau", "must be in [0, 1]");
  if (!(c.count_decay > 0.0 && c.count_decay <= 1.0)) throw ConfigError("count_decay", "must be in (0, 1]");
  for (std::size_t h : c.hidden_units)
    if (h == 0) throw ConfigError("hidden_units", "layer widths must be positive");
  positive("replicas", static_cast<double>(c.replicas));
  for (int g = 0; g < 2; ++g)
    if (uses_lambda(c.algorithm[static_cast<std::size_t>(g)]) && c.observation != ObservationModel::Mode::PDO)
      throw ConfigError(g == 0 ? "algorithm_group_a" : "algorithm_group_b",
                        "the distance-aware algorithm requires observation = pdo");
}

std::string canonical_text(const RunConfig& c) {
  std::ostringstream os;
  os << "game = " << to_string(c.game) << '\n';
  os << "observation = " << (c.observation == ObservationModel::Mode::FOR ? "for" : "pdo") << '\n';
  os << "for_radius_cells = " << fmt(c.for_radius_cells) << '\n';
  os << "pdo_lambda = " << fmt(c.pdo_lambda) << '\n';
  os << "algorithm_group_a = " << to_string(c.algorithm[0]) << '\n';
  os << "algorithm_group_b = " << to_string(c.algorithm[1]) << '\n';
  os << "episodes = " << c.episodes << '\n';
  os << "max_steps = " << c.max_steps << '\n';
  os << "agents_group_a = " << c.agents[0] << '\n';
  os << "agents_group_b = " << c.agents[1] << '\n';
  os << "map_width_cells = " << c.map_width_cells << '\n';
  os << "map_height_cells = " << c.map_height_cells << '\n';
  os << "food_count = " << c.food_count << '\n';
  os << "backend = " << to_string(c.backend) << '\n';
  os << "learning_rate = " << fmt(c.learning_rate) << '\n';
  os << "tabular_alpha = " << fmt(c.tabular_alpha) << '\n';
  os << "discount = " << fmt(c.discount) << '\n';
  os << "replay_capacity = " << c.replay_capacity << '\n';
  os << "batch_size = " << c.batch_size << '\n';
  os << "mean_action_samples = " << c.mean_action_samples << '\n';
  os << "lambda_samples = " << c.lambda_samples << '\n';
  os << "temperature_initial = " << fmt(c.temperature_initial) << '\n';
  os << "temperature_final = " << fmt(c.temperature_final) << '\n';
  os << "soft_update_tau = " << fmt(c.soft_update_tau) << '\n';
  os << "count_decay = " << fmt(c.count_decay) << '\n';
  os << "hidden_units = ";
  for (std::size_t i = 0; i < c.hidden_units.size(); ++i) os << (i ? "," : "") << c.hidden_units[i];
  os << '\n';
  os << "seed = " << c.seed << '\n';
  os << "replicas = " << c.replicas << '\n';
  return os.str();
}

std::uint64_t config_hash(const RunConfig& config) { return fnv1a64(canonical_text(config)); }

GameSpec game_spec(const RunConfig& c, std::uint64_t seed) {
  GameSpec spec = default_game_spec(c.game);
  spec.group_counts = c.agents;
  spec.width = c.map_width_cells;
  spec.height = c.map_height_cells;
  spec.food_count = c.game == GameId::BattleGathering ? c.food_count : 0;
  spec.max_steps = c.max_steps;
  spec.seed = seed;
  return spec;
}

ObservationModel observation_model(const RunConfig& c) {
  ObservationModel m;
  m.mode = c.observation;
  if (c.for_radius_cells > 0.0) m.radius = c.for_radius_cells;
  m.visibility.lambda = c.pdo_lambda;
  return m;
}

LearnerConfig learner_config(const RunConfig& c, int group) {
  LearnerConfig lc;
  lc.algorithm = c.algorithm.at(static_cast<std::size_t>(group));
  lc.backend = c.backend;
  lc.num_actions = kNumActions;
  lc.observation_size = observation_size(c.game);
  lc.hidden = c.hidden_units;
  lc.adam.learning_rate = c.learning_rate;
  lc.tabular_alpha = c.tabular_alpha;
  lc.discount = c.discount;
  lc.tau = c.soft_update_tau;
  lc.replay_capacity = c.replay_capacity;
  lc.batch_size = c.batch_size;
  lc.mean_action_samples = c.mean_action_samples;
  lc.lambda_samples = c.lambda_samples;
  lc.count_decay = c.count_decay;
  lc.schedule = TemperatureSchedule{c.temperature_initial, c.temperature_final, std::max<std::uint64_t>(c.episodes, 1)};
  return lc;
}

}  // namespace pomfq
