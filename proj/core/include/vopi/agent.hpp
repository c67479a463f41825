#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "vopi/action_space.hpp"
#include "vopi/data.hpp"
#include "vopi/nn.hpp"
#include "vopi/random.hpp"
#include "vopi/ring_buffer.hpp"

namespace vopi {

struct AgentConfig {
  std::vector<std::size_t> trunk_hidden = {512, 256};
  std::size_t batch_size = 128;
  double learning_rate = 1e-4;
  std::size_t buffer_capacity = 50'000;
  std::uint64_t seed = 0;
  // The network regresses (r - reward_shift) / reward_scale. Any positive
  // affine map leaves the greedy policy unchanged.
  double reward_shift = 0.0;
  double reward_scale = 1.0;
};

struct RewardRecord {
  FeatureVector state{};
  std::size_t action = 0;
  double reward = 0.0;  // $, negated monetary score
};

struct ActionChoice {
  std::size_t index = 0;
  double lower_proportion = 0.0;
  bool explored = false;
};

// Linear decay from start to end over the first decay_fraction of
// total_steps, constant afterwards.
struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.05;
  double decay_fraction = 0.5;
  std::uint64_t total_steps = 1;

  double value(std::uint64_t step) const;
};

// Index of the largest entry; ties go to the lowest index.
std::size_t greedy_index(const nn::Vector& q);

// Value-based contextual bandit over an ActionSpace with a dueling Q-network.
class Agent {
public:
  Agent(const ActionSpace& actions, const AgentConfig& config);
  Agent(const ActionSpace& actions, const AgentConfig& config, nn::DuelingHead network);

  const ActionSpace& action_space() const noexcept { return actions_; }
  const AgentConfig& config() const noexcept { return config_; }

  // Q-values in reward units ($).
  nn::Vector q_values(const FeatureVector& state) const;

  // Epsilon-greedy. Always consumes one uniform draw, plus an index draw
  // when exploring.
  ActionChoice select_action(const FeatureVector& state, double epsilon, Rng& rng) const;
  ActionChoice greedy_action(const FeatureVector& state) const;

  void store(const RewardRecord& record);
  const RingBuffer<RewardRecord>& buffer() const noexcept { return buffer_; }

  // One Adam step on sum 1/2 (Q(s, a) - r)^2 / |batch| over the records,
  // with gradient only through each record's chosen action.
  double update(std::span<const RewardRecord> batch);
  // Samples min(batch_size, |buffer|) records uniformly and calls update().
  double update_from_buffer(Rng& rng);

  // Loss and flat parameter gradient of update()'s objective, without
  // stepping. Exposed for gradient checks.
  double loss(std::span<const RewardRecord> batch) const;
  std::vector<double> loss_gradient(std::span<const RewardRecord> batch) const;

  nn::DuelingHead& network() noexcept { return network_; }
  const nn::DuelingHead& network() const noexcept { return network_; }

  std::uint64_t schedule_step() const noexcept { return schedule_step_; }
  void set_schedule_step(std::uint64_t step) noexcept { schedule_step_ = step; }

  void save(const std::filesystem::path& path) const;
  static Agent load(const std::filesystem::path& path, const AgentConfig& config);

private:
  nn::Matrix states_matrix(std::span<const RewardRecord> batch) const;
  double forward_backward(std::span<const RewardRecord> batch, nn::DuelingHead::Grads& grads) const;

  ActionSpace actions_;
  AgentConfig config_;
  nn::DuelingHead network_;
  nn::Adam trunk_opt_;
  nn::Adam value_opt_;
  nn::Adam advantage_opt_;
  RingBuffer<RewardRecord> buffer_;
  std::uint64_t schedule_step_ = 0;
};

}  // namespace vopi
