// pomfq: train, face off, and analyse partially observable mean-field Q-learners.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pomfq/belief.hpp"
#include "pomfq/checkpoint.hpp"
#include "pomfq/config.hpp"
#include "pomfq/errors.hpp"
#include "pomfq/experiment.hpp"
#include "pomfq/ising.hpp"

namespace fs = std::filesystem;
using namespace pomfq;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct RunFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicas;
  std::optional<std::uint64_t> episodes;
  std::string out = ".";
  bool no_wall_clock = false;
  std::size_t threads = 0;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config_path, "key = value run configuration");
  cmd->add_option("--seed", f.seed, "master seed (overrides the config)");
  cmd->add_option("--replicas", f.replicas, "independent replicas (overrides the config)");
  cmd->add_option("--episodes", f.episodes, "episodes to run in this invocation");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_flag("--no-wall-clock", f.no_wall_clock, "write wall_ms = 0 for byte-reproducible CSVs");
  cmd->add_option("--threads", f.threads, "worker threads (0 = all cores)");
}

RunConfig resolve_config(const RunFlags& f) {
  RunConfig c = f.config_path.empty() ? parse_run_config("") : load_run_config(f.config_path);
  if (f.seed) c.seed = *f.seed;
  if (f.replicas) c.replicas = *f.replicas;
  validate(c);
  return c;
}

TrainOptions train_options(const RunFlags& f) {
  TrainOptions t;
  t.out_dir = f.out;
  t.episodes = f.episodes;
  t.wall_clock = !f.no_wall_clock;
  t.threads = f.threads;
  return t;
}

std::string pairing_name(const Checkpoint& a, const Checkpoint& b) {
  return std::string(to_string(a.config.algorithm[0])) + "_vs_" + std::string(to_string(b.config.algorithm[1]));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partially observable mean-field Q-learning experiments"};
  app.require_subcommand(1);

  RunFlags train_flags;
  bool resume = false;
  auto* train = app.add_subcommand("train", "train both groups with the configured algorithms");
  add_run_flags(train, train_flags);
  train->add_flag("--resume", resume, "continue from the checkpoints in --out");

  std::string ckpt_a, ckpt_b, faceoff_out = ".";
  std::uint64_t games = 1000, faceoff_seed = 0;
  std::size_t faceoff_threads = 0;
  auto* faceoff = app.add_subcommand("faceoff", "play two trained checkpoints against each other");
  faceoff->add_option("--a", ckpt_a, "checkpoint of the first algorithm")->required()->check(CLI::ExistingFile);
  faceoff->add_option("--b", ckpt_b, "checkpoint of the second algorithm")->required()->check(CLI::ExistingFile);
  faceoff->add_option("--games", games, "games in total, split evenly between the two orientations");
  faceoff->add_option("--seed", faceoff_seed, "seed for arenas and action sampling");
  faceoff->add_option("--out", faceoff_out, "output directory");
  faceoff->add_option("--threads", faceoff_threads, "worker threads (0 = all cores)");

  IsingConfig ising_cfg;
  std::string ising_out = ".";
  std::size_t window = 50;
  auto* ising = app.add_subcommand("ising", "tabular learner on the 10x10 Ising stage game");
  ising->add_option("--episodes", ising_cfg.episodes, "episodes");
  ising->add_option("--seed", ising_cfg.seed, "seed");
  ising->add_option("--samples", ising_cfg.dirichlet_samples, "Dirichlet draws per mean-action estimate");
  ising->add_option("--stages", ising_cfg.stages_per_episode, "stage games per episode");
  ising->add_option("--temperature", ising_cfg.temperature, "Boltzmann temperature");
  ising->add_option("--delta", ising_cfg.delta, "confidence parameter of the bound");
  ising->add_option("--window", window, "smoothing window for the summary");
  ising->add_option("--out", ising_out, "output directory");

  RunFlags ablate_flags;
  std::vector<double> radii{2, 4, 6, 8, 10};
  std::optional<std::uint64_t> ttest_episode;
  auto* ablate = app.add_subcommand("ablate", "train once per observation radius");
  add_run_flags(ablate, ablate_flags);
  ablate->add_option("--radii", radii, "observation radii in cells")->delimiter(',');
  ablate->add_option("--ttest-episode", ttest_episode, "episode whose rewards are compared across radii");

  std::vector<std::uint64_t> bound_n{10, 100, 1000, 10000};
  double bound_delta = 0.9;
  std::size_t bound_actions = kNumActions;
  auto* bounds = app.add_subcommand("bounds", "print the mean-action concentration bounds");
  bounds->add_option("--n", bound_n, "sample counts")->delimiter(',');
  bounds->add_option("--delta", bound_delta, "confidence parameter");
  bounds->add_option("--actions", bound_actions, "number of actions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*train) {
      const RunConfig config = resolve_config(train_flags);
      TrainOptions opt = train_options(train_flags);
      opt.resume = resume;
      const auto summary = run_training(config, opt);
      std::cout << "episodes run: " << summary.rows.size() / 2 / config.replicas << " x " << config.replicas
                << " replica(s); wrote " << (fs::path(opt.out_dir) / "train.csv").string() << '\n';
    } else if (*faceoff) {
      const Checkpoint a = load_checkpoint(ckpt_a);
      const Checkpoint b = load_checkpoint(ckpt_b);
      const FaceoffResult r = run_faceoff(a, b, games, faceoff_seed, faceoff_threads);
      fs::create_directories(faceoff_out);
      std::ofstream out(fs::path(faceoff_out) / "faceoff.csv", std::ios::trunc);
      out << kFaceoffCsvHeader << '\n'
          << pairing_name(a, b) << ',' << r.wins_a << ',' << r.wins_b << ',' << r.draws << ','
          << format_number(r.fisher_p) << '\n';
      std::cout << pairing_name(a, b) << ": " << r.wins_a << " / " << r.wins_b << " / " << r.draws
                << " (wins a / wins b / draws), Fisher p = " << r.fisher_p << '\n';
    } else if (*ising) {
      const BoundReport rep = run_ising_pomfq(ising_cfg);
      fs::create_directories(ising_out);
      std::ofstream out(fs::path(ising_out) / "ising.csv", std::ios::trunc);
      out << kIsingCsvHeader << '\n';
      for (std::size_t i = 0; i < rep.mse.size(); ++i)
        out << i << ',' << format_number(rep.mse[i]) << ',' << format_number(rep.d_trajectory[i]) << '\n';
      const auto smoothed = smooth(rep.mse, window);
      const double last = smoothed.empty() ? rep.final_mse : smoothed.back();
      std::cout << "Z = " << rep.bound.z << "  K = " << rep.bound.k << "  D = " << rep.bound.d << '\n'
                << "smoothed MSE: first " << (smoothed.empty() ? 0.0 : smoothed.front()) << ", last " << last << '\n'
                << "(2D)^2 = " << std::pow(2.0 * rep.bound.d, 2) << "  (D/10)^2 = " << std::pow(rep.bound.d / 10.0, 2)
                << '\n';
    } else if (*ablate) {
      const RunConfig config = resolve_config(ablate_flags);
      AblationOptions opt;
      opt.radii = radii;
      opt.train = train_options(ablate_flags);
      opt.ttest_episode = ttest_episode;
      const auto result = run_ablation(config, opt);
      std::cout << "radii run: " << result.radii.size() << "; wrote "
                << (fs::path(opt.train.out_dir) / "ablate.csv").string() << '\n';
    } else if (*bounds) {
      std::cout << "n,delta,hoeffding,z\n";
      for (std::uint64_t n : bound_n)
        std::cout << n << ',' << bound_delta << ',' << hoeffding_bound(n, bound_delta) << ','
                  << static_cast<double>(bound_actions) * std::log(2.0 / bound_delta) / (2.0 * static_cast<double>(n))
                  << '\n';
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ConfigMismatchError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ArgumentError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
