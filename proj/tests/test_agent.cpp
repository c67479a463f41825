#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include "oracles/numeric_oracles.hpp"
#include "vopi/action_space.hpp"
#include "vopi/agent.hpp"
#include "vopi/error.hpp"
#include "vopi/ring_buffer.hpp"

using namespace vopi;

namespace {

AgentConfig small_config(std::uint64_t seed = 1) {
  AgentConfig c;
  c.trunk_hidden = {32, 16};
  c.batch_size = 16;
  c.seed = seed;
  return c;
}

nn::Vector vec(std::initializer_list<double> v) {
  nn::Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_CASE("action space construction") {
  const auto a = build_action_space(0.05, 2);
  REQUIRE(a.size() == 3);
  CHECK(a[0] == doctest::Approx(0.0125).epsilon(1e-14));
  CHECK(a[1] == doctest::Approx(0.025).epsilon(1e-14));
  CHECK(a[2] == doctest::Approx(0.0375).epsilon(1e-14));

  const auto one = build_action_space(0.10, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == doctest::Approx(0.05).epsilon(1e-14));

  const auto seven = build_action_space(0.05, 3);
  REQUIRE(seven.size() == 7);
  for (std::size_t i = 1; i < 7; ++i) CHECK(seven[i] - seven[i - 1] == doctest::Approx(0.00625).epsilon(1e-12));
  CHECK(seven[6] < 0.05);

  CHECK_THROWS_AS(build_action_space(0.05, 0), ArgumentError);
  CHECK_THROWS_AS(build_action_space(1.5, 2), ArgumentError);
}

TEST_CASE("greedy index and ties") {
  CHECK(greedy_index(vec({1.0, 3.0, 2.0})) == 1);
  CHECK(greedy_index(vec({2.0, 2.0, 1.0})) == 0);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  for (int i = 0; i < 100; ++i) {
    const nn::Vector q = vec({n(rng), n(rng), n(rng), n(rng)});
    CHECK(greedy_index(q) == greedy_index((q.array() + 123.25).matrix()));
  }
}

TEST_CASE("uniform exploration at epsilon one") {
  const Agent agent(ActionSpace(0.05, 2), small_config());
  Rng rng = make_rng(5, "epsilon");
  std::vector<int> counts(3, 0);
  const int draws = 100'000;
  for (int i = 0; i < draws; ++i) {
    const auto c = agent.select_action(FeatureVector{0.1, 0.2, 0.3, 0.4}, 1.0, rng);
    CHECK(c.explored);
    ++counts[c.index];
  }
  for (int c : counts) CHECK(std::abs(c / static_cast<double>(draws) - 1.0 / 3.0) < 0.01);
}

TEST_CASE("greedy selection is stable for a frozen agent") {
  const Agent agent(ActionSpace(0.05, 3), small_config(9));
  Rng rng(2);
  const FeatureVector s{0.4, -1.0, 0.2, 0.9};
  const auto first = agent.greedy_action(s);
  for (int i = 0; i < 20; ++i) {
    CHECK(agent.select_action(s, 0.0, rng).index == first.index);
    CHECK(!agent.select_action(s, 0.0, rng).explored);
  }
  CHECK(first.lower_proportion == agent.action_space()[first.index]);
}

TEST_CASE("exact fit leaves the agent unchanged") {
  const ActionSpace actions(0.05, 2);
  Agent agent(actions, small_config(), nn::DuelingHead::zeros(4, {32, 16}, 3));
  const std::vector<RewardRecord> batch = {{FeatureVector{1, 2, 3, 4}, 1, 0.0}, {FeatureVector{0, 1, 0, 1}, 2, 0.0}};
  for (double g : agent.loss_gradient(batch)) REQUIRE(g == 0.0);
  const auto before = agent.network().flat_parameters();
  agent.update(batch);
  CHECK(agent.network().flat_parameters() == before);
}

TEST_CASE("agent loss gradient matches central differences") {
  Agent agent(ActionSpace(0.05, 2), small_config(4));
  const std::vector<RewardRecord> single = {{FeatureVector{0.3, -0.7, 1.1, 0.2}, 2, -1.5}};
  const std::vector<RewardRecord> batch = {{FeatureVector{0.3, -0.7, 1.1, 0.2}, 2, -1.5},
                                           {FeatureVector{-0.5, 0.1, 0.4, -1.2}, 0, 0.8},
                                           {FeatureVector{1.0, 1.0, -0.3, 0.5}, 1, 2.0}};
  for (const auto* records : {&single, &batch}) {
    const auto analytic = agent.loss_gradient(*records);
    const auto params = agent.network().flat_parameters();
    auto loss = [&](const std::vector<double>& p) {
      Agent copy = agent;
      copy.network().set_flat_parameters(p);
      return copy.loss(*records);
    };
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<std::size_t> pick(0, params.size() - 1);
    double worst = 0.0;
    for (int probe = 0; probe < 100; ++probe) {
      const std::size_t k = pick(rng);
      worst = std::max(worst, oracle::relative_error(analytic[k], oracle::central_difference(loss, params, k)));
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("agent learns the best arm for a constant state") {
  AgentConfig cfg;
  cfg.seed = 8;
  Agent agent(ActionSpace(0.05, 2), cfg);
  const FeatureVector s{0.5, 0.5, 0.5, 0.5};
  const double rewards[] = {0.0, 5.0, 1.0};
  for (int i = 0; i < 300; ++i) agent.store(RewardRecord{s, static_cast<std::size_t>(i % 3), rewards[i % 3]});
  Rng rng(3);
  for (int i = 0; i < 3000; ++i) agent.update_from_buffer(rng);
  CHECK(agent.greedy_action(s).index == 1);
  const auto q = agent.q_values(s);
  CHECK(std::abs(q(1) - 5.0) < 0.5);
}

TEST_CASE("non-finite rewards are rejected") {
  Agent agent(ActionSpace(0.05, 2), small_config());
  CHECK_THROWS_AS(agent.store(RewardRecord{FeatureVector{}, 0, std::nan("")}), NumericError);
  const std::vector<RewardRecord> batch = {{FeatureVector{}, 0, std::numeric_limits<double>::infinity()}};
  CHECK_THROWS_AS(agent.update(batch), NumericError);
}

TEST_CASE("replay buffer drops the oldest records") {
  RingBuffer<int> buf(4);
  for (int i = 0; i < 4 + 3; ++i) buf.push(i);
  CHECK(buf.size() == 4);
  CHECK(buf[0] == 3);
  CHECK(buf[3] == 6);
  CHECK_THROWS_AS(RingBuffer<int>(0), ArgumentError);
}

TEST_CASE("epsilon schedule") {
  const EpsilonSchedule e{1.0, 0.05, 0.5, 1000};
  CHECK(e.value(0) == 1.0);
  CHECK(e.value(250) == doctest::Approx(0.525));
  CHECK(e.value(500) == doctest::Approx(0.05));
  CHECK(e.value(999) == doctest::Approx(0.05));
}

TEST_CASE("agent checkpoint round trip") {
  Agent agent(ActionSpace(0.05, 2), small_config(12));
  agent.set_schedule_step(77);
  const auto path = std::filesystem::temp_directory_path() / "vopi_test_agent.bin";
  agent.save(path);
  const Agent back = Agent::load(path, small_config(12));
  CHECK(back.schedule_step() == 77);
  CHECK(back.action_space().size() == 3);
  const FeatureVector s{0.1, 0.2, 0.3, 0.4};
  CHECK(back.q_values(s) == agent.q_values(s));
}
