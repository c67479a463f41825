#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vopi/action_space.hpp"
#include "vopi/data.hpp"
#include "vopi/nn.hpp"
#include "vopi/random.hpp"
#include "vopi/ring_buffer.hpp"

namespace vopi {

// Lower/upper quantile levels of an interval with nominal coverage 1 - beta.
struct ProportionPair {
  double lower = 0.0;
  double upper = 0.0;
  double ncp = 0.0;

  static ProportionPair from_lower(double lower, double beta);
  static ProportionPair central(double beta) { return from_lower(beta / 2.0, beta); }
};

struct PredictionInterval {
  double lower = 0.0;  // MW
  double upper = 0.0;  // MW
  ProportionPair proportions;

  double width() const noexcept { return upper - lower; }
  bool covers(double y) const noexcept { return y >= lower && y <= upper; }
};

// Clamps both bounds into [0, capacity] and swaps them if they cross.
PredictionInterval make_interval(double raw_lower, double raw_upper, const ProportionPair& proportions,
                                 double capacity);

// max(alpha (y - x), (alpha - 1)(y - x)).
double pinball_loss(double alpha, double prediction, double realization);

struct QrModelConfig {
  std::vector<std::size_t> hidden = {128, 128};
  nn::AdamConfig adam{};
  std::size_t buffer_capacity = 50'000;
  // Labels are divided by this before entering the network; predictions are
  // multiplied back. The pinball minimizer is scale-equivariant.
  double label_scale = 1.0;
};

struct QrSample {
  FeatureVector state{};
  double label = 0.0;
};

// One quantile-regression network with its own replay buffer and optimizer.
class QrModel {
public:
  QrModel(double proportion, const QrModelConfig& config, std::uint64_t seed);
  QrModel(double proportion, const QrModelConfig& config, nn::Mlp net);

  double proportion() const noexcept { return proportion_; }
  double predict(const FeatureVector& state) const;

  void store(const FeatureVector& state, double label);
  // One Adam step on min(batch_size, |buffer|) samples; returns the batch's
  // mean pinball loss (label units) before the step.
  double train_step(std::size_t batch_size, Rng& rng);

  const RingBuffer<QrSample>& buffer() const noexcept { return buffer_; }
  const nn::Mlp& net() const noexcept { return net_; }
  double label_scale() const noexcept { return label_scale_; }

  void save(const std::filesystem::path& path) const;
  static QrModel load(const std::filesystem::path& path, const QrModelConfig& config);

private:
  double proportion_;
  double label_scale_;
  nn::Mlp net_;
  nn::Adam optimizer_;
  RingBuffer<QrSample> buffer_;
};

enum class BoundRole { kLower, kUpper };

struct BankUpdate {
  double lower_loss = 0.0;
  double upper_loss = 0.0;
};

// 2|A| quantile models: one lower-bound model per action and one upper-bound
// model at lower + 1 - beta.
class QrBank {
public:
  QrBank(const ActionSpace& actions, const QrModelConfig& config, std::uint64_t seed);

  const ActionSpace& action_space() const noexcept { return actions_; }
  std::size_t size() const noexcept { return actions_.size(); }
  ProportionPair pair(std::size_t action) const;
  // Throws LookupError if the pair does not match an action of this bank.
  std::size_t index_of(const ProportionPair& pair) const;

  QrModel& model(std::size_t action, BoundRole role);
  const QrModel& model(std::size_t action, BoundRole role) const;

  // Stores the sample in both selected models' buffers and takes one step on
  // each; all other models are left untouched.
  BankUpdate update_selected(const ProportionPair& pair, const FeatureVector& state, double label,
                             std::size_t batch_size, Rng& rng);

  PredictionInterval predict_interval(const ProportionPair& pair, const FeatureVector& state,
                                      double capacity) const;

  // Directory layout: lower/q0.012500.bin, upper/q0.987500.bin, ...
  void save(const std::filesystem::path& dir) const;
  static QrBank load(const std::filesystem::path& dir, const ActionSpace& actions, const QrModelConfig& config);

private:
  QrBank(const ActionSpace& actions, std::vector<QrModel> lower, std::vector<QrModel> upper);

  ActionSpace actions_;
  std::vector<QrModel> lower_;
  std::vector<QrModel> upper_;
};

// Fixed 6-decimal key used for checkpoint file names, e.g. "q0.012500".
std::string proportion_key(double proportion);

}  // namespace vopi
