#include "vopi/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "vopi/binary_io.hpp"
#include "vopi/error.hpp"

namespace vopi {

namespace {

constexpr std::string_view kQrMagic{"VOPI-QRM", 8};
constexpr std::uint32_t kQrVersion = 1;
constexpr double kPairTolerance = 1e-12;

std::vector<std::size_t> qr_widths(const QrModelConfig& config) {
  std::vector<std::size_t> widths{kFeatureCount};
  widths.insert(widths.end(), config.hidden.begin(), config.hidden.end());
  widths.push_back(1);
  return widths;
}

nn::Vector to_vector(const FeatureVector& f) {
  return Eigen::Map<const nn::Vector>(f.data(), static_cast<Eigen::Index>(f.size()));
}

}  // namespace

ProportionPair ProportionPair::from_lower(double lower, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw ArgumentError("beta must lie in (0, 1)");
  if (!(lower > 0.0 && lower < beta)) throw ArgumentError("lower proportion must lie in (0, beta)");
  return ProportionPair{lower, lower + 1.0 - beta, 1.0 - beta};
}

PredictionInterval make_interval(double raw_lower, double raw_upper, const ProportionPair& proportions,
                                 double capacity) {
  double lo = std::clamp(raw_lower, 0.0, capacity);
  double hi = std::clamp(raw_upper, 0.0, capacity);
  if (lo > hi) std::swap(lo, hi);
  return PredictionInterval{lo, hi, proportions};
}

double pinball_loss(double alpha, double prediction, double realization) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("pinball proportion must lie in (0, 1)");
  const double r = realization - prediction;
  return std::max(alpha * r, (alpha - 1.0) * r);
}

QrModel::QrModel(double proportion, const QrModelConfig& config, std::uint64_t seed)
    : QrModel(proportion, config, nn::Mlp(qr_widths(config), nn::Activation::kLinear, seed)) {}

QrModel::QrModel(double proportion, const QrModelConfig& config, nn::Mlp net)
    : proportion_(proportion),
      label_scale_(config.label_scale),
      net_(std::move(net)),
      optimizer_(net_, config.adam),
      buffer_(config.buffer_capacity) {
  if (!(proportion > 0.0 && proportion < 1.0)) throw ArgumentError("proportion must lie in (0, 1)");
  if (!(label_scale_ > 0.0)) throw ArgumentError("label scale must be positive");
  if (net_.input_size() != kFeatureCount || net_.output_size() != 1) {
    throw ShapeError("quantile network must map 4 features to 1 output");
  }
}

double QrModel::predict(const FeatureVector& state) const {
  return label_scale_ * net_.forward(to_vector(state))(0);
}

void QrModel::store(const FeatureVector& state, double label) { buffer_.push(QrSample{state, label}); }

double QrModel::train_step(std::size_t batch_size, Rng& rng) {
  if (buffer_.empty()) throw ArgumentError("cannot train a quantile model with an empty buffer");
  if (batch_size == 0) throw ArgumentError("batch size must be positive");
  const std::size_t n = buffer_.size();
  const std::size_t b = std::min(batch_size, n);

  nn::Matrix x(static_cast<Eigen::Index>(kFeatureCount), static_cast<Eigen::Index>(b));
  std::vector<double> labels(b);
  for (std::size_t j = 0; j < b; ++j) {
    const std::size_t idx = b == n ? j : static_cast<std::size_t>(uniform_index(rng, n));
    const QrSample& s = buffer_[idx];
    for (std::size_t k = 0; k < kFeatureCount; ++k) x(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = s.state[k];
    labels[j] = s.label / label_scale_;
  }

  nn::ForwardCache cache;
  const nn::Matrix pred = net_.forward(x, &cache);
  nn::Matrix grad(1, static_cast<Eigen::Index>(b));
  double loss = 0.0;
  const double inv_b = 1.0 / static_cast<double>(b);
  for (std::size_t j = 0; j < b; ++j) {
    const double u = pred(0, static_cast<Eigen::Index>(j));
    loss += pinball_loss(proportion_, u, labels[j]);
    double g = 0.0;
    if (labels[j] > u) {
      g = -proportion_;
    } else if (labels[j] < u) {
      g = 1.0 - proportion_;
    }
    grad(0, static_cast<Eigen::Index>(j)) = g * inv_b;
  }
  nn::Gradients grads = net_.make_gradients();
  net_.backward(cache, grad, grads);
  optimizer_.step(net_, grads);
  return loss * inv_b * label_scale_;
}

void QrModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  io::write_magic(out, kQrMagic);
  io::write_u32(out, kQrVersion);
  io::write_f64(out, proportion_);
  io::write_f64(out, label_scale_);
  net_.save(out);
  if (!out) throw IoError("write failed for " + path.string());
}

QrModel QrModel::load(const std::filesystem::path& path, const QrModelConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  io::expect_magic(in, kQrMagic);
  const auto version = io::read_u32(in);
  if (version != kQrVersion) throw IoError("unsupported quantile checkpoint version");
  const double proportion = io::read_f64(in);
  QrModelConfig c = config;
  c.label_scale = io::read_f64(in);
  return QrModel(proportion, c, nn::Mlp::load(in));
}

std::string proportion_key(double proportion) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "q%.6f", proportion);
  return buf;
}

QrBank::QrBank(const ActionSpace& actions, const QrModelConfig& config, std::uint64_t seed) : actions_(actions) {
  if (actions.size() == 0) throw ArgumentError("quantile bank needs a non-empty action space");
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const ProportionPair p = pair(i);
    lower_.emplace_back(p.lower, config, derive_seed(seed, "lower/" + std::to_string(i)));
    upper_.emplace_back(p.upper, config, derive_seed(seed, "upper/" + std::to_string(i)));
  }
}

QrBank::QrBank(const ActionSpace& actions, std::vector<QrModel> lower, std::vector<QrModel> upper)
    : actions_(actions), lower_(std::move(lower)), upper_(std::move(upper)) {}

ProportionPair QrBank::pair(std::size_t action) const {
  if (action >= actions_.size()) throw LookupError("action index " + std::to_string(action) + " out of range");
  return ProportionPair::from_lower(actions_[action], actions_.beta());
}

std::size_t QrBank::index_of(const ProportionPair& p) const {
  for (std::size_t i = 0; i < actions_.size(); ++i) {
    const ProportionPair q = pair(i);
    if (std::abs(q.lower - p.lower) <= kPairTolerance && std::abs(q.upper - p.upper) <= kPairTolerance) {
      return i;
    }
  }
  throw LookupError("no quantile models for proportions (" + std::to_string(p.lower) + ", " +
                    std::to_string(p.upper) + ")");
}

QrModel& QrBank::model(std::size_t action, BoundRole role) {
  if (action >= actions_.size()) throw LookupError("action index out of range");
  return role == BoundRole::kLower ? lower_[action] : upper_[action];
}

const QrModel& QrBank::model(std::size_t action, BoundRole role) const {
  if (action >= actions_.size()) throw LookupError("action index out of range");
  return role == BoundRole::kLower ? lower_[action] : upper_[action];
}

BankUpdate QrBank::update_selected(const ProportionPair& p, const FeatureVector& state, double label,
                                   std::size_t batch_size, Rng& rng) {
  const std::size_t i = index_of(p);
  lower_[i].store(state, label);
  upper_[i].store(state, label);
  BankUpdate u;
  u.lower_loss = lower_[i].train_step(batch_size, rng);
  u.upper_loss = upper_[i].train_step(batch_size, rng);
  return u;
}

PredictionInterval QrBank::predict_interval(const ProportionPair& p, const FeatureVector& state,
                                            double capacity) const {
  const std::size_t i = index_of(p);
  return make_interval(lower_[i].predict(state), upper_[i].predict(state), pair(i), capacity);
}

void QrBank::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir / "lower");
  std::filesystem::create_directories(dir / "upper");
  for (std::size_t i = 0; i < size(); ++i) {
    lower_[i].save(dir / "lower" / (proportion_key(lower_[i].proportion()) + ".bin"));
    upper_[i].save(dir / "upper" / (proportion_key(upper_[i].proportion()) + ".bin"));
  }
}

QrBank QrBank::load(const std::filesystem::path& dir, const ActionSpace& actions, const QrModelConfig& config) {
  std::vector<QrModel> lower;
  std::vector<QrModel> upper;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const ProportionPair p = ProportionPair::from_lower(actions[i], actions.beta());
    lower.push_back(QrModel::load(dir / "lower" / (proportion_key(p.lower) + ".bin"), config));
    upper.push_back(QrModel::load(dir / "upper" / (proportion_key(p.upper) + ".bin"), config));
  }
  return QrBank(actions, std::move(lower), std::move(upper));
}

}  // namespace vopi
