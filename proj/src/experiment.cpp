#include "pomfq/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "pomfq/errors.hpp"
#include "pomfq/stats.hpp"

namespace pomfq {

namespace fs = std::filesystem;

std::string format_number(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string format_train_row(const TrainRow& r) {
  std::ostringstream os;
  os << r.episode << ',' << r.replica << ',' << r.group << ',' << format_number(r.reward_sum) << ',' << r.kills << ','
     << r.alive << ',' << format_number(r.wall_ms);
  return os.str();
}

std::vector<TrainRow> parse_train_csv(const std::string& text) {
  std::vector<TrainRow> rows;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      if (line != kTrainCsvHeader) throw std::runtime_error("unexpected train.csv header: " + line);
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    TrainRow r;
    if (!(fields >> r.episode >> r.replica >> r.group >> r.reward_sum >> r.kills >> r.alive >> r.wall_ms))
      throw std::runtime_error("malformed train.csv row");
    rows.push_back(r);
  }
  return rows;
}

void parallel_for(std::size_t jobs, std::size_t threads, const std::function<void(std::size_t)>& task) {
  if (jobs == 0) return;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, jobs);
  if (threads == 1) {
    for (std::size_t i = 0; i < jobs; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  for (std::size_t t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < jobs; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = jobs;
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);
}

Rng replica_root(std::uint64_t master_seed, std::uint64_t replica) { return Rng(master_seed).split(replica); }

std::uint64_t episode_seed(std::uint64_t master_seed, std::uint64_t replica, std::uint64_t episode) {
  return derive_seed(derive_seed(master_seed, replica, 1), episode);
}

ReplicaState make_replica(const RunConfig& config, std::uint64_t replica) {
  const Rng root = replica_root(config.seed, replica);
  Rng init = root.split(0);
  ReplicaState s;
  s.replica = replica;
  s.act_rng = root.split(1);
  s.train_rng = root.split(2);
  for (int g = 0; g < 2; ++g)
    s.groups.emplace_back(learner_config(config, g), config.agents[static_cast<std::size_t>(g)], init);
  return s;
}

void advance_replica(const RunConfig& config, ReplicaState& state, std::uint64_t episodes, bool wall_clock,
                     std::vector<TrainRow>& rows) {
  EpisodeOptions options;
  options.observation = observation_model(config);
  for (std::uint64_t k = 0; k < episodes; ++k) {
    const std::uint64_t ep = state.episodes_done;
    const auto start = std::chrono::steady_clock::now();
    ArenaState env = make_game(game_spec(config, episode_seed(config.seed, state.replica, ep)));
    options.episode = ep;
    const EpisodeMetrics m =
        run_episode(env, {&state.groups[0], &state.groups[1]}, options, state.act_rng, state.train_rng);
    const double ms =
        wall_clock ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count() : 0.0;
    for (int g = 0; g < 2; ++g) {
      const GroupMetrics& gm = m.groups[static_cast<std::size_t>(g)];
      rows.push_back(TrainRow{ep, state.replica, g, gm.reward_sum, gm.kills, gm.alive, std::round(ms * 1000.0) / 1000.0});
    }
    ++state.episodes_done;
  }
}

fs::path checkpoint_path(const fs::path& dir, std::uint64_t replica) {
  return dir / ("checkpoint_r" + std::to_string(replica) + ".bin");
}

namespace {

fs::path replica_csv(const fs::path& dir, std::uint64_t replica) {
  return dir / ("train_r" + std::to_string(replica) + ".csv");
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

void merge_train_csv(const fs::path& dir, std::size_t replicas) {
  using Key = std::tuple<std::uint64_t, std::uint64_t, int>;
  std::vector<std::pair<Key, std::string>> lines;
  for (std::size_t i = 0; i < replicas; ++i) {
    std::istringstream in(read_file(replica_csv(dir, i)));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream f(line);
      std::uint64_t ep = 0, rep = 0;
      int g = 0;
      char c1 = 0, c2 = 0;
      f >> ep >> c1 >> rep >> c2 >> g;
      lines.emplace_back(Key{ep, rep, g}, line);
    }
  }
  std::stable_sort(lines.begin(), lines.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::string out = std::string(kTrainCsvHeader) + "\n";
  for (const auto& [k, line] : lines) out += line + "\n";
  write_file(dir / "train.csv", out);
}

}  // namespace

TrainSummary run_training(const RunConfig& config, const TrainOptions& options) {
  validate(config);
  fs::create_directories(options.out_dir);
  const std::size_t replicas = config.replicas;
  std::vector<ReplicaState> states(replicas);
  for (std::size_t i = 0; i < replicas; ++i) {
    if (options.resume) {
      Checkpoint ckpt = load_checkpoint(checkpoint_path(options.out_dir, i), config_hash(config));
      if (ckpt.state.replica != i) throw ConfigMismatchError("checkpoint belongs to another replica");
      if (!fs::exists(replica_csv(options.out_dir, i)))
        throw std::runtime_error("missing '" + replica_csv(options.out_dir, i).string() + "' for resume");
      states[i] = std::move(ckpt.state);
    } else {
      states[i] = make_replica(config, i);
      write_file(replica_csv(options.out_dir, i), std::string(kTrainCsvHeader) + "\n");
    }
  }

  std::vector<std::vector<TrainRow>> rows(replicas);
  parallel_for(replicas, options.threads, [&](std::size_t i) {
    ReplicaState& s = states[i];
    std::uint64_t n = 0;
    if (options.episodes) n = *options.episodes;
    else n = config.episodes > s.episodes_done ? config.episodes - s.episodes_done : 0;
    advance_replica(config, s, n, options.wall_clock, rows[i]);
    std::ofstream out(replica_csv(options.out_dir, i), std::ios::binary | std::ios::app);
    for (const TrainRow& r : rows[i]) out << format_train_row(r) << '\n';
    if (!out) throw std::runtime_error("failed appending to '" + replica_csv(options.out_dir, i).string() + "'");
    out.close();
    save_checkpoint(checkpoint_path(options.out_dir, i), Checkpoint{config, std::move(s)});
  });
  merge_train_csv(options.out_dir, replicas);

  TrainSummary summary;
  for (std::size_t i = 0; i < replicas; ++i) {
    summary.rows.insert(summary.rows.end(), rows[i].begin(), rows[i].end());
    summary.checkpoints.push_back(checkpoint_path(options.out_dir, i));
  }
  std::stable_sort(summary.rows.begin(), summary.rows.end(), [](const TrainRow& a, const TrainRow& b) {
    return std::tie(a.episode, a.replica, a.group) < std::tie(b.episode, b.replica, b.group);
  });
  return summary;
}

void check_compatible(const RunConfig& a, const RunConfig& b) {
  auto require = [](bool ok, const char* field) {
    if (!ok) throw ConfigError(field, "checkpoints describe different arenas");
  };
  require(a.game == b.game, "game");
  require(a.observation == b.observation, "observation");
  require(a.for_radius_cells == b.for_radius_cells, "for_radius_cells");
  require(a.pdo_lambda == b.pdo_lambda, "pdo_lambda");
  require(a.agents == b.agents, "agents_group_a");
  require(a.map_width_cells == b.map_width_cells, "map_width_cells");
  require(a.map_height_cells == b.map_height_cells, "map_height_cells");
  require(a.food_count == b.food_count, "food_count");
  require(a.max_steps == b.max_steps, "max_steps");
}

std::optional<int> game_winner(GameId game, const EpisodeMetrics& m) {
  const auto& g = m.groups;
  if (g[0].alive != g[1].alive) return g[0].alive > g[1].alive ? 0 : 1;
  if (game == GameId::PredatorPrey) return std::nullopt;
  if (g[0].reward_sum != g[1].reward_sum) return g[0].reward_sum > g[1].reward_sum ? 0 : 1;
  return std::nullopt;
}

namespace {

GroupLearner evaluation_copy(const GroupLearner& learner) {
  GroupLearner copy = learner;
  copy.replay().restore({}, 0);
  return copy;
}

}  // namespace

FaceoffResult run_faceoff(const Checkpoint& a, const Checkpoint& b, std::uint64_t games, std::uint64_t seed,
                          std::size_t threads) {
  check_compatible(a.config, b.config);
  if (a.state.groups.size() != 2 || b.state.groups.size() != 2) throw StateError("run_faceoff: incomplete checkpoint");
  const std::array<std::array<GroupLearner, 2>, 2> lineups{{
      {evaluation_copy(a.state.groups[0]), evaluation_copy(b.state.groups[1])},
      {evaluation_copy(b.state.groups[0]), evaluation_copy(a.state.groups[1])},
  }};
  const double temperature = std::min(a.config.temperature_final, b.config.temperature_final);
  const std::uint64_t first_half = games / 2;
  EpisodeOptions options;
  options.observation = observation_model(a.config);
  options.learn = false;
  options.temperature = temperature;

  // outcome: +1 A wins, -1 B wins, 0 draw
  std::vector<int> outcome(games, 0);
  parallel_for(games, threads, [&](std::size_t g) {
    const int orientation = g < first_half ? 0 : 1;
    const int a_side = orientation == 0 ? 0 : 1;
    GroupLearner side0 = lineups[static_cast<std::size_t>(orientation)][0];
    GroupLearner side1 = lineups[static_cast<std::size_t>(orientation)][1];
    ArenaState env = make_game(game_spec(a.config, derive_seed(seed, g, 0)));
    Rng act(derive_seed(seed, g, 1));
    Rng train(derive_seed(seed, g, 2));
    const EpisodeMetrics m = run_episode(env, {&side0, &side1}, options, act, train);
    const auto w = game_winner(a.config.game, m);
    outcome[g] = !w ? 0 : (*w == a_side ? 1 : -1);
  });

  FaceoffResult r;
  r.games = games;
  for (int o : outcome) {
    if (o > 0) ++r.wins_a;
    else if (o < 0) ++r.wins_b;
    else ++r.draws;
  }
  r.fisher_p = fisher_exact(r.wins_a, games - r.wins_a, r.wins_b, games - r.wins_b);
  return r;
}

FaceoffResult run_faceoff(const fs::path& a, const fs::path& b, std::uint64_t games, std::uint64_t seed,
                          std::size_t threads) {
  return run_faceoff(load_checkpoint(a), load_checkpoint(b), games, seed, threads);
}

AblationResult run_ablation(const RunConfig& config, const AblationOptions& options) {
  if (config.observation != ObservationModel::Mode::FOR) throw ConfigError("observation", "ablation requires observation = for");
  if (options.radii.empty()) throw ConfigError("radii", "at least one radius is required");
  for (double r : options.radii)
    if (!(r > 0.0)) throw ConfigError("radii", "radii must be positive");
  if (options.ttest_episode && config.replicas < 2) throw ConfigError("replicas", "t-tests need at least two replicas");
  fs::create_directories(options.train.out_dir);

  AblationResult result;
  std::string merged = std::string(kAblateCsvHeader) + "\n";
  std::vector<std::vector<double>> samples;
  for (double radius : options.radii) {
    RunConfig cfg = config;
    cfg.for_radius_cells = radius;
    TrainOptions topt = options.train;
    topt.out_dir = options.train.out_dir / ("radius_" + format_number(radius));
    run_training(cfg, topt);
    const auto rows = parse_train_csv(read_file(topt.out_dir / "train.csv"));
    std::istringstream in(read_file(topt.out_dir / "train.csv"));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line))
      if (!line.empty()) merged += format_number(radius) + "," + line + "\n";
    std::vector<double> at_episode;
    if (options.ttest_episode)
      for (const TrainRow& r : rows)
        if (r.episode == *options.ttest_episode && r.group == 0) at_episode.push_back(r.reward_sum);
    samples.push_back(std::move(at_episode));
    result.radii.push_back(radius);
    result.rows.push_back(rows);
  }
  write_file(options.train.out_dir / "ablate.csv", merged);

  if (options.ttest_episode) {
    std::string out = std::string(kTtestCsvHeader) + "\n";
    for (std::size_t i = 0; i < samples.size(); ++i)
      for (std::size_t j = i + 1; j < samples.size(); ++j) {
        if (samples[i].size() < 2 || samples[j].size() < 2)
          throw ConfigError("ttest_episode", "episode " + std::to_string(*options.ttest_episode) + " was not run");
        const TTestResult t = welch_t_test(samples[i], samples[j]);
        out += std::to_string(*options.ttest_episode) + "," + format_number(result.radii[i]) + "," +
               format_number(result.radii[j]) + "," + format_number(t.t) + "," + format_number(t.df) + "," +
               format_number(t.p) + "\n";
      }
    write_file(options.train.out_dir / "ablate_ttest.csv", out);
  }
  return result;
}

}  // namespace pomfq
