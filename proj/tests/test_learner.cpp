#include <doctest.h>

#include <cmath>
#include <numeric>

#include "pomfq/backend.hpp"
#include "pomfq/errors.hpp"
#include "pomfq/group_learner.hpp"
#include "pomfq/policy.hpp"
#include "pomfq/replay.hpp"

using namespace pomfq;

TEST_CASE("boltzmann probabilities") {
  const std::vector<double> q{1.0, 2.0, 3.0};
  const auto p = boltzmann_probs(q, 1.0);
  const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  CHECK(p[2] == doctest::Approx(std::exp(3.0) / z).epsilon(1e-14));
  CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0));
  // Higher value, higher probability; low temperature is nearly greedy.
  CHECK(p[0] < p[1]);
  const auto greedy = boltzmann_probs(q, 0.01);
  CHECK(greedy[2] > 0.999);
  const std::vector<double> big{1000.0, 1001.0};
  const auto stable = boltzmann_probs(big, 1.0);
  CHECK(std::isfinite(stable[0]));
  CHECK(stable[1] == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
  CHECK_THROWS_AS(boltzmann_probs(q, 0.0), ArgumentError);
  CHECK_THROWS_AS(boltzmann_probs(std::vector<double>{}, 1.0), ArgumentError);
}

TEST_CASE("temperature schedule") {
  const TemperatureSchedule s{1.0, 0.01, 100};
  CHECK(s.at(0) == 1.0);
  CHECK(s.at(99) == doctest::Approx(0.01));
  CHECK(s.at(500) == doctest::Approx(0.01));
  CHECK(s.at(50) < s.at(49));
}

TEST_CASE("sampled actions follow the probabilities") {
  Rng r(1);
  const std::vector<double> p{0.2, 0.5, 0.3};
  std::array<int, 3> h{};
  for (int i = 0; i < 100000; ++i) ++h[static_cast<std::size_t>(sample_index(p, r))];
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::fabs(h[i] / 1e5 - p[i]) < 0.01);
}

TEST_CASE("value operator equals the policy-weighted sum") {
  TabularQ t(3);
  const std::vector<double> obs{0.5};
  const std::vector<double> ma{0.2, 0.3, 0.5};
  const QQuery q{obs, ma, std::nullopt};
  const auto key = t.key(q);
  t.set_value(key, 0, 1.0);
  t.set_value(key, 1, -2.0);
  t.set_value(key, 2, 0.5);
  const QBackend b = t;
  const auto probs = boltzmann_probs(std::vector<double>{1.0, -2.0, 0.5}, 0.7);
  const double ref = probs[0] * 1.0 + probs[1] * -2.0 + probs[2] * 0.5;
  CHECK(pomf_value(b, q, 0.7) == doctest::Approx(ref).epsilon(1e-14));
}

TEST_CASE("tabular TD update and key binning") {
  TabularQ t(2);
  const QQuery q{{}, {}, std::nullopt};
  const auto key = t.key(q);
  CHECK(t.values(key) == std::vector<double>{0.0, 0.0});
  tabular_td_update(t, key, 1, 2.0, 1.0, 0.5, 0.9);
  // 0.5 * 0 + 0.5 * (2 + 0.9)
  CHECK(t.value(key, 1) == doctest::Approx(1.45));
  CHECK_THROWS_AS(tabular_td_update(t, key, 0, 0, 0, 1.5, 0.9), ArgumentError);
  CHECK_THROWS_AS(tabular_td_update(t, key, 0, 0, 0, 0.5, 1.0), ArgumentError);

  CHECK(mean_action_bin(0.0, 32) == 0);
  CHECK(mean_action_bin(1.0, 32) == 31);
  CHECK(mean_action_bin(0.5, 32) == 16);
  CHECK(lambda_bin(4.0, 16) == 15);
  CHECK(lambda_bin(2.0, 16) == 14);
  CHECK(lambda_bin(100.0, 16) == 15);
  CHECK(lambda_bin(1e-9, 16) == 0);
  CHECK(observation_key(std::vector<double>{}) == 0);
  CHECK(observation_key(std::vector<double>{0.1, 0.2}) == observation_key(std::vector<double>{0.1 + 1e-9, 0.2}));
  CHECK(observation_key(std::vector<double>{0.1, 0.2}) != observation_key(std::vector<double>{0.2, 0.1}));
}

TEST_CASE("neural input layout") {
  Rng r(2);
  const std::vector<std::size_t> hidden{4};
  const NeuralQ n = make_neural_q(InputLayout{2, 3, true}, 3, hidden, AdamConfig{}, r);
  CHECK(n.online == n.target);
  const std::vector<double> obs{1, 2};
  const std::vector<double> ma{0.1, 0.2, 0.7};
  const Eigen::VectorXd x = n.input(QQuery{obs, ma, 3.0});
  CHECK(x.size() == 6);
  CHECK(x(0) == 1.0);
  CHECK(x(4) == 0.7);
  CHECK(x(5) == 3.0);
  CHECK_THROWS_AS(n.input(QQuery{obs, ma, std::nullopt}), DimensionError);
  CHECK_THROWS_AS(n.input(QQuery{obs, obs, 1.0}), DimensionError);
}

TEST_CASE("replay buffer ring semantics") {
  ReplayBuffer buf(3);
  Rng r(3);
  CHECK_THROWS_AS(buf.sample(1, r), StateError);
  for (int i = 0; i < 5; ++i) {
    Experience e;
    e.action = i;
    buf.push(e);
  }
  CHECK(buf.size() == 3);
  std::vector<int> held;
  for (const auto& e : buf.items()) held.push_back(e.action);
  std::sort(held.begin(), held.end());
  CHECK(held == std::vector<int>{2, 3, 4});
  const auto s = buf.sample(100, r);
  CHECK(s.size() == 100);
  for (const auto* e : s) CHECK(e->action >= 2);
}

TEST_CASE("algorithm names round trip") {
  for (Algorithm a : {Algorithm::IL, Algorithm::MFQ, Algorithm::POMFQ_FOR, Algorithm::POMFQ_PDO})
    CHECK(parse_algorithm(to_string(a)) == a);
  CHECK_THROWS_AS(parse_algorithm("dqn"), ArgumentError);
  CHECK_FALSE(uses_mean_action(Algorithm::IL));
  CHECK(uses_lambda(Algorithm::POMFQ_PDO));
  CHECK_FALSE(uses_lambda(Algorithm::POMFQ_FOR));
}

namespace {

LearnerConfig small_config(Algorithm a, BackendKind b) {
  LearnerConfig c;
  c.algorithm = a;
  c.backend = b;
  c.num_actions = 3;
  c.observation_size = 2;
  c.hidden = {8};
  c.batch_size = 4;
  c.replay_capacity = 32;
  c.mean_action_samples = 50;
  c.lambda_samples = 20;
  c.schedule = TemperatureSchedule{1.0, 0.1, 10};
  return c;
}

}  // namespace

TEST_CASE("beliefs per algorithm") {
  Rng init(4), r(5);
  const std::vector<int> seen{0, 0, 2};
  const std::vector<double> dist{1.0, 2.0, 3.0};

  GroupLearner il(small_config(Algorithm::IL, BackendKind::Tabular), 2, init);
  il.update_beliefs(0, seen, dist, r);
  CHECK(il.query(0, {}).mean_action.empty());

  GroupLearner mfq(small_config(Algorithm::MFQ, BackendKind::Tabular), 2, init);
  mfq.update_beliefs(0, seen, dist, r);
  CHECK(mfq.beliefs()[0].mean_action[0] == doctest::Approx(2.0 / 3));
  mfq.update_beliefs(0, std::vector<int>{}, std::vector<double>{}, r);
  CHECK(mfq.beliefs()[0].mean_action[0] == doctest::Approx(2.0 / 3));

  GroupLearner pfor(small_config(Algorithm::POMFQ_FOR, BackendKind::Tabular), 2, init);
  pfor.update_beliefs(1, seen, dist, r);
  CHECK(pfor.beliefs()[1].dirichlet.concentration()[0] == 3.0);
  CHECK(pfor.beliefs()[1].visibility == make_visibility_prior());
  CHECK_FALSE(pfor.query(1, {}).lambda_bar);

  GroupLearner pdo(small_config(Algorithm::POMFQ_PDO, BackendKind::Tabular), 2, init);
  pdo.update_beliefs(0, seen, dist, r);
  CHECK(pdo.beliefs()[0].visibility.shape == 2.5);
  CHECK(pdo.query(0, {}).lambda_bar);
}

TEST_CASE("tabular learner moves toward the reward of a terminal transition") {
  Rng init(6), r(7);
  GroupLearner g(small_config(Algorithm::POMFQ_FOR, BackendKind::Tabular), 1, init);
  g.begin_episode(0);
  const std::vector<double> obs{0.0, 1.0};
  for (int i = 0; i < 50; ++i) {
    g.store(g.make_experience(0, obs, 1, 3.0, obs, true));
    g.train(r);
  }
  CHECK(q_values(g.backend(), g.query(0, obs))[1] == doctest::Approx(3.0).epsilon(1e-3));
}

TEST_CASE("neural learner reduces its TD loss") {
  Rng init(8), r(9);
  auto cfg = small_config(Algorithm::IL, BackendKind::Neural);
  cfg.adam.learning_rate = 1e-2;
  GroupLearner g(cfg, 1, init);
  g.begin_episode(0);
  for (int a = 0; a < 3; ++a) {
    const std::vector<double> obs{static_cast<double>(a), 1.0};
    g.store(g.make_experience(0, obs, a, static_cast<double>(a), obs, true));
  }
  std::vector<const Experience*> all;
  for (const auto& e : g.replay().items()) all.push_back(&e);
  const double first = g.train_minibatch(all);
  double last = first;
  for (int i = 0; i < 300; ++i) last = g.train_minibatch(all);
  CHECK(last < 0.05 * first);
}
