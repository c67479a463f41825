#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "oracles/numeric_oracles.hpp"
#include "vopi/action_space.hpp"
#include "vopi/data.hpp"
#include "vopi/error.hpp"
#include "vopi/quantile.hpp"

using namespace vopi;

TEST_CASE("pinball loss") {
  CHECK(pinball_loss(0.1, 5.0, 3.0) == doctest::Approx(1.8).epsilon(1e-15));
  CHECK(pinball_loss(0.5, 2.0, 7.0) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(pinball_loss(0.5, 7.0, 2.0) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(pinball_loss(0.3, 4.0, 4.0) == 0.0);
  CHECK_THROWS_AS(pinball_loss(0.0, 1.0, 2.0), ArgumentError);
  CHECK_THROWS_AS(pinball_loss(1.0, 1.0, 2.0), ArgumentError);
}

TEST_CASE("pinball loss is convex in the prediction") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-10.0, 10.0), a(0.01, 0.99), l(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double alpha = a(rng), y = u(rng), x1 = u(rng), x2 = u(rng), lam = l(rng);
    const double mid = pinball_loss(alpha, lam * x1 + (1 - lam) * x2, y);
    CHECK(mid <= lam * pinball_loss(alpha, x1, y) + (1 - lam) * pinball_loss(alpha, x2, y) + 1e-12);
  }
}

TEST_CASE("proportion pairs") {
  const auto p = ProportionPair::from_lower(0.0125, 0.05);
  CHECK(p.upper == doctest::Approx(0.9625).epsilon(1e-15));
  CHECK(p.ncp == doctest::Approx(0.95).epsilon(1e-15));
  const auto c = ProportionPair::central(0.10);
  CHECK(c.lower == doctest::Approx(0.05));
  CHECK(c.upper == doctest::Approx(0.95));
  CHECK_THROWS_AS(ProportionPair::from_lower(0.06, 0.05), ArgumentError);
}

TEST_CASE("interval post-processing") {
  const auto pair = ProportionPair::central(0.05);
  const auto clamped = make_interval(-2.0, 35.0, pair, 30.0);
  CHECK(clamped.lower == 0.0);
  CHECK(clamped.upper == 30.0);
  const auto swapped = make_interval(12.0, 9.0, pair, 30.0);
  CHECK(swapped.lower == 9.0);
  CHECK(swapped.upper == 12.0);
}

TEST_CASE("bank layout and zero-initialized prediction") {
  const ActionSpace actions(0.05, 2);
  QrModelConfig cfg;
  cfg.hidden = {8};
  QrBank bank(actions, cfg, 5);
  CHECK(bank.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(bank.model(i, BoundRole::kLower).proportion() == doctest::Approx(actions[i]));
    CHECK(bank.model(i, BoundRole::kUpper).proportion() == doctest::Approx(actions[i] + 0.95));
    CHECK(bank.index_of(bank.pair(i)) == i);
  }
  CHECK_THROWS_AS(bank.index_of(ProportionPair::from_lower(0.02, 0.05)), LookupError);

  for (std::size_t i = 0; i < 3; ++i) {
    for (BoundRole r : {BoundRole::kLower, BoundRole::kUpper}) {
      auto& net = const_cast<nn::Mlp&>(bank.model(i, r).net());
      net.set_flat_parameters(std::vector<double>(net.parameter_count(), 0.0));
    }
  }
  const auto pi = bank.predict_interval(bank.pair(1), FeatureVector{1, 2, 3, 4}, 30.0);
  CHECK(pi.lower == 0.0);
  CHECK(pi.upper == 0.0);
}

TEST_CASE("only the selected models change") {
  const ActionSpace actions(0.05, 2);
  QrModelConfig cfg;
  cfg.hidden = {16, 16};
  QrBank bank(actions, cfg, 9);
  std::vector<std::uint64_t> before;
  for (std::size_t i = 0; i < 3; ++i) {
    before.push_back(bank.model(i, BoundRole::kLower).net().parameter_hash());
    before.push_back(bank.model(i, BoundRole::kUpper).net().parameter_hash());
  }
  Rng rng(3);
  const auto pair = bank.pair(1);
  CHECK(pair.lower == doctest::Approx(0.025));
  const BankUpdate u = bank.update_selected(pair, FeatureVector{0.1, 0.2, 0.3, 0.4}, 12.0, 128, rng);
  CHECK(u.lower_loss >= 0.0);
  CHECK(bank.model(1, BoundRole::kLower).buffer().size() == 1);
  CHECK(bank.model(0, BoundRole::kLower).buffer().size() == 0);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const bool lo = bank.model(i, BoundRole::kLower).net().parameter_hash() != before[2 * i];
    const bool hi = bank.model(i, BoundRole::kUpper).net().parameter_hash() != before[2 * i + 1];
    CHECK(lo == (i == 1));
    CHECK(hi == (i == 1));
    changed += lo + hi;
  }
  CHECK(changed == 2);
}

TEST_CASE("buffer is a bounded FIFO") {
  QrModelConfig cfg;
  cfg.hidden = {4};
  cfg.buffer_capacity = 5;
  QrModel m(0.5, cfg, 1);
  for (int i = 0; i < 8; ++i) m.store(FeatureVector{}, static_cast<double>(i));
  CHECK(m.buffer().size() == 5);
  CHECK(m.buffer()[0].label == 3.0);
  CHECK(m.buffer()[4].label == 7.0);
}

TEST_CASE("quantile model converges to the empirical quantile") {
  QrModelConfig cfg;
  QrModel m(0.1, cfg, 4);
  Rng data = make_rng(1, "labels");
  Rng batches = make_rng(1, "batches");
  std::vector<double> labels;
  const FeatureVector x{0.5, -0.5, 0.25, 1.0};
  for (int i = 0; i < 10'000; ++i) {
    labels.push_back(uniform01(data));
    m.store(x, labels.back());
    m.train_step(128, batches);
  }
  const double target = oracle::sorted_quantile(labels, 0.1);
  CHECK(std::abs(m.predict(x) - target) < 0.02);
}

TEST_CASE("bank checkpoint round trip") {
  const ActionSpace actions(0.05, 2);
  QrModelConfig cfg;
  cfg.hidden = {8};
  cfg.label_scale = 30.0;
  QrBank bank(actions, cfg, 12);
  Rng rng(1);
  bank.update_selected(bank.pair(2), FeatureVector{1, 0, 1, 0}, 5.0, 4, rng);
  const auto dir = std::filesystem::temp_directory_path() / "vopi_test_bank";
  std::filesystem::remove_all(dir);
  bank.save(dir);
  CHECK(std::filesystem::exists(dir / "lower" / (proportion_key(actions[0]) + ".bin")));
  CHECK(proportion_key(0.0125) == "q0.012500");
  const QrBank back = QrBank::load(dir, actions, cfg);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.model(i, BoundRole::kLower).net().parameter_hash() ==
          bank.model(i, BoundRole::kLower).net().parameter_hash());
    CHECK(back.model(i, BoundRole::kUpper).label_scale() == 30.0);
  }
}
