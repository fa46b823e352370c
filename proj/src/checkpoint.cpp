#include "pomfq/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <iterator>

#include "pomfq/errors.hpp"

namespace pomfq {

namespace {

constexpr std::array<std::uint8_t, 8> kMagic{'P', 'O', 'M', 'F', 'Q', 'C', 'K', 0};
constexpr std::size_t kHeaderSize = 8 + 4 + 8 + 8;

void write_matrix(ByteWriter& w, const Eigen::MatrixXd& m) {
  w.u64(static_cast<std::uint64_t>(m.rows()));
  w.u64(static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.size(); ++i) w.f64(m.data()[i]);
}

Eigen::MatrixXd read_matrix(ByteReader& r) {
  const std::size_t rows = r.count(0);
  const std::size_t cols = r.count(0);
  if (rows != 0 && cols > r.remaining() / 8 / rows) throw ReadPastEnd("matrix larger than remaining data");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = r.f64();
  return m;
}

void write_vector(ByteWriter& w, const Eigen::VectorXd& v) { w.f64s(std::span(v.data(), static_cast<std::size_t>(v.size()))); }

Eigen::VectorXd read_vector(ByteReader& r) {
  const auto v = r.f64s();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void write_network(ByteWriter& w, const NetworkParams& p) {
  w.u64(p.layers.size());
  for (const Layer& l : p.layers) {
    w.u8(static_cast<std::uint8_t>(l.activation));
    write_matrix(w, l.weight);
    write_vector(w, l.bias);
  }
}

NetworkParams read_network(ByteReader& r) {
  NetworkParams p;
  p.layers.resize(r.count());
  for (Layer& l : p.layers) {
    const std::uint8_t act = r.u8();
    if (act > 1) throw ReadPastEnd("bad activation tag");
    l.activation = static_cast<Activation>(act);
    l.weight = read_matrix(r);
    l.bias = read_vector(r);
  }
  return p;
}

void write_grads(ByteWriter& w, const GradientSet& g) {
  w.u64(g.weight.size());
  for (const auto& m : g.weight) write_matrix(w, m);
  w.u64(g.bias.size());
  for (const auto& b : g.bias) write_vector(w, b);
}

GradientSet read_grads(ByteReader& r) {
  GradientSet g;
  g.weight.resize(r.count());
  for (auto& m : g.weight) m = read_matrix(r);
  g.bias.resize(r.count());
  for (auto& b : g.bias) b = read_vector(r);
  return g;
}

void write_rng(ByteWriter& w, const Rng& rng) {
  for (std::uint64_t s : rng.state()) w.u64(s);
}

Rng read_rng(ByteReader& r) {
  Rng::State s{};
  for (auto& x : s) x = r.u64();
  Rng rng;
  rng.set_state(s);
  return rng;
}

void write_backend(ByteWriter& w, const QBackend& backend) {
  w.u8(static_cast<std::uint8_t>(backend.index()));
  if (const auto* t = std::get_if<TabularQ>(&backend)) {
    w.u64(t->num_actions());
    w.u64(t->mean_action_bins());
    w.u64(t->lambda_bins());
    w.u64(t->entries().size());
    for (const auto& [key, q] : t->entries()) {
      w.u64(key.state);
      w.u64(key.mean_action_bins.size());
      w.raw(key.mean_action_bins);
      w.i64(key.lambda_bin);
      w.f64s(q);
    }
    return;
  }
  const auto& n = std::get<NeuralQ>(backend);
  w.u64(n.layout.observation_size);
  w.u64(n.layout.mean_action_size);
  w.boolean(n.layout.uses_lambda);
  write_network(w, n.online);
  write_network(w, n.target);
  const AdamConfig& a = n.optimizer.config;
  w.f64(a.learning_rate);
  w.f64(a.beta1);
  w.f64(a.beta2);
  w.f64(a.epsilon);
  w.u64(n.optimizer.step);
  write_grads(w, n.optimizer.first_moment);
  write_grads(w, n.optimizer.second_moment);
}

void read_backend(ByteReader& r, QBackend& backend) {
  const std::uint8_t kind = r.u8();
  if (kind != backend.index()) throw ConfigMismatchError("checkpoint backend kind differs from the configuration");
  if (auto* t = std::get_if<TabularQ>(&backend)) {
    const std::size_t actions = r.count(0);
    const std::size_t bins = r.count(0);
    const std::size_t lbins = r.count(0);
    if (actions != t->num_actions() || bins != t->mean_action_bins() || lbins != t->lambda_bins())
      throw ConfigMismatchError("checkpoint table shape differs from the configuration");
    auto& entries = t->entries();
    entries.clear();
    const std::size_t n = r.count();
    for (std::size_t i = 0; i < n; ++i) {
      TabularKey key;
      key.state = r.u64();
      key.mean_action_bins.resize(r.count());
      for (auto& b : key.mean_action_bins) b = r.u8();
      key.lambda_bin = static_cast<std::int16_t>(r.i64());
      auto q = r.f64s();
      if (q.size() != actions) throw ConfigMismatchError("checkpoint table row has the wrong width");
      entries.emplace(std::move(key), std::move(q));
    }
    return;
  }
  auto& n = std::get<NeuralQ>(backend);
  InputLayout layout;
  layout.observation_size = r.count(0);
  layout.mean_action_size = r.count(0);
  layout.uses_lambda = r.boolean();
  if (!(layout == n.layout)) throw ConfigMismatchError("checkpoint input layout differs from the configuration");
  NetworkParams online = read_network(r);
  NetworkParams target = read_network(r);
  if (!online.same_shape(n.online) || !target.same_shape(n.target))
    throw ConfigMismatchError("checkpoint network shape differs from the configuration");
  n.online = std::move(online);
  n.target = std::move(target);
  AdamConfig& a = n.optimizer.config;
  a.learning_rate = r.f64();
  a.beta1 = r.f64();
  a.beta2 = r.f64();
  a.epsilon = r.f64();
  n.optimizer.step = r.u64();
  n.optimizer.first_moment = read_grads(r);
  n.optimizer.second_moment = read_grads(r);
}

void write_experience(ByteWriter& w, const Experience& e) {
  w.f64s(e.observation);
  w.i64(e.action);
  w.f64(e.reward);
  w.f64s(e.next_observation);
  w.f64s(e.mean_action);
  w.boolean(e.lambda_bar.has_value());
  w.f64(e.lambda_bar.value_or(0.0));
  w.boolean(e.terminal);
}

Experience read_experience(ByteReader& r) {
  Experience e;
  e.observation = r.f64s();
  e.action = static_cast<int>(r.i64());
  e.reward = r.f64();
  e.next_observation = r.f64s();
  e.mean_action = r.f64s();
  const bool has_lambda = r.boolean();
  const double lambda = r.f64();
  if (has_lambda) e.lambda_bar = lambda;
  e.terminal = r.boolean();
  return e;
}

}  // namespace

void write_learner(ByteWriter& w, const GroupLearner& learner) {
  write_backend(w, learner.backend());
  const ReplayBuffer& replay = learner.replay();
  w.u64(replay.capacity());
  w.u64(replay.cursor());
  w.u64(replay.size());
  for (const Experience& e : replay.items()) write_experience(w, e);
  w.u64(learner.beliefs().size());
  for (const AgentBelief& b : learner.beliefs()) {
    w.f64s(b.dirichlet.concentration());
    w.u64(b.dirichlet.sample_count_total());
    w.f64(b.visibility.shape);
    w.f64(b.visibility.rate);
    w.f64(b.visibility.point_estimate);
    w.f64(b.visibility.lambda_bar);
    w.f64s(b.mean_action);
  }
}

GroupLearner read_learner(ByteReader& r, const LearnerConfig& config, std::size_t num_agents) {
  Rng scratch(0);
  GroupLearner learner(config, num_agents, scratch);
  read_backend(r, learner.backend());
  const std::size_t capacity = r.count(0);
  const std::size_t cursor = r.count(0);
  if (capacity != learner.replay().capacity()) throw ConfigMismatchError("checkpoint replay capacity differs");
  std::vector<Experience> items(r.count());
  for (auto& e : items) e = read_experience(r);
  learner.replay().restore(std::move(items), cursor);
  if (r.count() != num_agents) throw ConfigMismatchError("checkpoint group size differs from the configuration");
  for (AgentBelief& b : learner.beliefs()) {
    auto eta = r.f64s();
    const std::uint64_t total = r.u64();
    if (eta.size() != config.num_actions) throw ConfigMismatchError("checkpoint belief width differs");
    b.dirichlet = MeanActionBelief(std::move(eta), total);
    b.visibility.shape = r.f64();
    b.visibility.rate = r.f64();
    b.visibility.point_estimate = r.f64();
    b.visibility.lambda_bar = r.f64();
    b.mean_action = r.f64s();
  }
  return learner;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.state.groups.size() != 2) throw StateError("encode_checkpoint: expected two groups");
  ByteWriter p;
  p.str(canonical_text(ckpt.config));
  p.u64(config_hash(ckpt.config));
  p.u64(ckpt.state.replica);
  p.u64(ckpt.state.episodes_done);
  write_rng(p, ckpt.state.act_rng);
  write_rng(p, ckpt.state.train_rng);
  for (const auto& g : ckpt.state.groups) write_learner(p, g);
  const auto payload = p.take();

  ByteWriter out;
  out.raw(kMagic);
  out.u32(kCheckpointVersion);
  out.u64(fnv1a64(payload));
  out.u64(payload.size());
  out.raw(payload);
  return out.take();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes, std::optional<std::uint64_t> expected_config_hash) {
  if (bytes.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin()))
    throw BadMagicError("not a checkpoint file");
  if (bytes.size() < kHeaderSize) throw TruncatedError("checkpoint header is truncated");
  ByteReader header(bytes.subspan(kMagic.size(), kHeaderSize - kMagic.size()));
  const std::uint32_t version = header.u32();
  if (version != kCheckpointVersion)
    throw VersionError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                       std::to_string(kCheckpointVersion) + ")");
  const std::uint64_t checksum = header.u64();
  const std::uint64_t length = header.u64();
  const auto payload = bytes.subspan(kHeaderSize);
  if (payload.size() < length) throw TruncatedError("checkpoint payload is truncated");
  if (payload.size() != length || fnv1a64(payload) != checksum) throw ChecksumError("checkpoint checksum mismatch");

  try {
    ByteReader r(payload);
    const std::string text = r.str();
    const std::uint64_t stored_hash = r.u64();
    Checkpoint ckpt;
    try {
      ckpt.config = parse_run_config(text);
    } catch (const ConfigError& e) {
      throw ConfigMismatchError(std::string("checkpoint configuration is invalid: ") + e.what());
    }
    if (config_hash(ckpt.config) != stored_hash) throw ConfigMismatchError("checkpoint configuration hash mismatch");
    if (expected_config_hash && *expected_config_hash != stored_hash)
      throw ConfigMismatchError("checkpoint was written by a different configuration");
    ckpt.state.replica = r.u64();
    ckpt.state.episodes_done = r.u64();
    ckpt.state.act_rng = read_rng(r);
    ckpt.state.train_rng = read_rng(r);
    for (int g = 0; g < 2; ++g)
      ckpt.state.groups.push_back(read_learner(r, learner_config(ckpt.config, g), ckpt.config.agents[static_cast<std::size_t>(g)]));
    if (!r.done()) throw ChecksumError("checkpoint has trailing data");
    return ckpt;
  } catch (const ReadPastEnd& e) {
    throw TruncatedError(std::string("checkpoint payload ended early: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto bytes = encode_checkpoint(ckpt);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint '" + tmp.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("failed writing checkpoint '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path, std::optional<std::uint64_t> expected_config_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint '" + path.string() + "'");
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes, expected_config_hash);
}

}  // namespace pomfq
