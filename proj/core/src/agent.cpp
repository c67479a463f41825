#include "vopi/agent.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "vopi/binary_io.hpp"
#include "vopi/error.hpp"

namespace vopi {

namespace {

constexpr std::string_view kAgentMagic{"VOPI-AGT", 8};
constexpr std::uint32_t kAgentVersion = 1;

nn::Vector to_vector(const FeatureVector& f) {
  return Eigen::Map<const nn::Vector>(f.data(), static_cast<Eigen::Index>(f.size()));
}

void check_config(const AgentConfig& c) {
  if (c.batch_size == 0) throw ArgumentError("agent batch size must be at least 1");
  if (!(c.reward_scale > 0.0) || !std::isfinite(c.reward_shift)) {
    throw ArgumentError("reward normalization must have positive scale and finite shift");
  }
}

}  // namespace

double EpsilonSchedule::value(std::uint64_t step) const {
  const double horizon = decay_fraction * static_cast<double>(total_steps);
  if (horizon <= 0.0) return end;
  const double progress = std::min(1.0, static_cast<double>(step) / horizon);
  return start + (end - start) * progress;
}

std::size_t greedy_index(const nn::Vector& q) {
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < q.size(); ++i) {
    if (q(i) > q(static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(i);
  }
  return best;
}

Agent::Agent(const ActionSpace& actions, const AgentConfig& config)
    : Agent(actions, config,
            nn::DuelingHead(kFeatureCount, config.trunk_hidden, actions.size(), derive_seed(config.seed, "agent/init"))) {}

Agent::Agent(const ActionSpace& actions, const AgentConfig& config, nn::DuelingHead network)
    : actions_(actions),
      config_(config),
      network_(std::move(network)),
      trunk_opt_(network_.trunk(), nn::AdamConfig{config.learning_rate}),
      value_opt_(network_.value(), nn::AdamConfig{config.learning_rate}),
      advantage_opt_(network_.advantage(), nn::AdamConfig{config.learning_rate}),
      buffer_(config.buffer_capacity) {
  check_config(config_);
  if (actions_.size() == 0) throw ArgumentError("agent needs a non-empty action space");
  if (network_.actions() != actions_.size() || network_.input_size() != kFeatureCount) {
    throw ShapeError("agent network does not match the action space");
  }
}

nn::Vector Agent::q_values(const FeatureVector& state) const {
  return (network_.q_values(to_vector(state)).array() * config_.reward_scale + config_.reward_shift).matrix();
}

ActionChoice Agent::greedy_action(const FeatureVector& state) const {
  const std::size_t i = greedy_index(network_.q_values(to_vector(state)));
  return ActionChoice{i, actions_[i], false};
}

ActionChoice Agent::select_action(const FeatureVector& state, double epsilon, Rng& rng) const {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ArgumentError("epsilon must lie in [0, 1]");
  if (uniform01(rng) < epsilon) {
    const auto i = static_cast<std::size_t>(uniform_index(rng, actions_.size()));
    return ActionChoice{i, actions_[i], true};
  }
  return greedy_action(state);
}

void Agent::store(const RewardRecord& record) {
  if (record.action >= actions_.size()) throw ArgumentError("reward record action out of range");
  if (!std::isfinite(record.reward)) throw NumericError("non-finite reward");
  buffer_.push(record);
}

nn::Matrix Agent::states_matrix(std::span<const RewardRecord> batch) const {
  nn::Matrix x(static_cast<Eigen::Index>(kFeatureCount), static_cast<Eigen::Index>(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j) {
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
      x(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = batch[j].state[k];
    }
  }
  return x;
}

double Agent::forward_backward(std::span<const RewardRecord> batch, nn::DuelingHead::Grads& grads) const {
  if (batch.empty()) throw ArgumentError("agent update needs a non-empty batch");
  for (const auto& r : batch) {
    if (!std::isfinite(r.reward)) throw NumericError("non-finite reward in agent batch");
    if (r.action >= actions_.size()) throw ArgumentError("reward record action out of range");
  }
  nn::DuelingHead::Cache cache;
  const nn::Matrix q = network_.q_values(states_matrix(batch), &cache);
  nn::Matrix dq = nn::Matrix::Zero(q.rows(), q.cols());
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto a = static_cast<Eigen::Index>(batch[j].action);
    const auto c = static_cast<Eigen::Index>(j);
    const double target = (batch[j].reward - config_.reward_shift) / config_.reward_scale;
    const double err = q(a, c) - target;
    loss += 0.5 * err * err;
    dq(a, c) = err * inv_b;
  }
  network_.backward(cache, dq, grads);
  return loss * inv_b;
}

double Agent::update(std::span<const RewardRecord> batch) {
  auto grads = network_.make_gradients();
  const double l = forward_backward(batch, grads);
  trunk_opt_.step(network_.trunk(), grads.trunk);
  value_opt_.step(network_.value(), grads.value);
  advantage_opt_.step(network_.advantage(), grads.advantage);
  return l;
}

double Agent::update_from_buffer(Rng& rng) {
  if (buffer_.empty()) throw ArgumentError("agent buffer is empty");
  const std::size_t n = buffer_.size();
  const std::size_t b = std::min(config_.batch_size, n);
  std::vector<RewardRecord> batch;
  batch.reserve(b);
  for (std::size_t j = 0; j < b; ++j) {
    batch.push_back(buffer_[b == n ? j : static_cast<std::size_t>(uniform_index(rng, n))]);
  }
  return update(batch);
}

double Agent::loss(std::span<const RewardRecord> batch) const {
  auto grads = network_.make_gradients();
  return forward_backward(batch, grads);
}

std::vector<double> Agent::loss_gradient(std::span<const RewardRecord> batch) const {
  auto grads = network_.make_gradients();
  forward_backward(batch, grads);
  auto out = nn::flatten(grads.trunk);
  const auto v = nn::flatten(grads.value);
  const auto a = nn::flatten(grads.advantage);
  out.insert(out.end(), v.begin(), v.end());
  out.insert(out.end(), a.begin(), a.end());
  return out;
}

void Agent::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  io::write_magic(out, kAgentMagic);
  io::write_u32(out, kAgentVersion);
  io::write_f64(out, actions_.beta());
  io::write_u32(out, actions_.exponent());
  io::write_u64(out, schedule_step_);
  io::write_f64(out, config_.reward_shift);
  io::write_f64(out, config_.reward_scale);
  network_.trunk().save(out);
  network_.value().save(out);
  network_.advantage().save(out);
  if (!out) throw IoError("write failed for " + path.string());
}

Agent Agent::load(const std::filesystem::path& path, const AgentConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  io::expect_magic(in, kAgentMagic);
  if (io::read_u32(in) != kAgentVersion) throw IoError("unsupported agent checkpoint version");
  const double beta = io::read_f64(in);
  const auto exponent = io::read_u32(in);
  const auto step = io::read_u64(in);
  AgentConfig c = config;
  c.reward_shift = io::read_f64(in);
  c.reward_scale = io::read_f64(in);
  nn::Mlp trunk = nn::Mlp::load(in);
  nn::Mlp value = nn::Mlp::load(in);
  nn::Mlp advantage = nn::Mlp::load(in);

  std::vector<std::size_t> hidden(trunk.widths().begin() + 1, trunk.widths().end());
  c.trunk_hidden = hidden;
  const ActionSpace actions(beta, exponent);
  nn::DuelingHead head = nn::DuelingHead::zeros(kFeatureCount, hidden, actions.size());
  head.trunk() = std::move(trunk);
  head.value() = std::move(value);
  head.advantage() = std::move(advantage);
  if (head.advantage().output_size() != actions.size()) throw IoError("agent checkpoint action count mismatch");
  Agent agent(actions, c, std::move(head));
  agent.set_schedule_step(step);
  return agent;
}

}  // namespace vopi
