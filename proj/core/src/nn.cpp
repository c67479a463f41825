#include "vopi/nn.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "vopi/binary_io.hpp"
#include "vopi/error.hpp"
#include "vopi/random.hpp"

namespace vopi::nn {

namespace {

constexpr std::string_view kMlpMagic{"VOPI-MLP", 8};
constexpr std::uint32_t kMlpVersion = 1;

void check_widths(const std::vector<std::size_t>& widths) {
  if (widths.size() < 2) throw ShapeError("an Mlp needs at least input and output widths");
  for (std::size_t w : widths) {
    if (w == 0) throw ShapeError("layer widths must be positive");
  }
}

}  // namespace

void Gradients::set_zero() {
  for (auto& w : weight) w.setZero();
  for (auto& b : bias) b.setZero();
}

bool Gradients::all_zero() const {
  for (const auto& w : weight) {
    if (!w.isZero(0.0)) return false;
  }
  for (const auto& b : bias) {
    if (!b.isZero(0.0)) return false;
  }
  return true;
}

Mlp::Mlp(std::vector<std::size_t> widths, Activation output_activation, std::uint64_t seed)
    : widths_(std::move(widths)), output_activation_(output_activation) {
  check_widths(widths_);
  Rng rng(seed);
  layers_.reserve(widths_.size() - 1);
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    const auto fan_in = static_cast<Eigen::Index>(widths_[l]);
    const auto fan_out = static_cast<Eigen::Index>(widths_[l + 1]);
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    DenseLayer layer{Matrix(fan_out, fan_in), Vector::Zero(fan_out)};
    for (Eigen::Index r = 0; r < fan_out; ++r) {
      for (Eigen::Index c = 0; c < fan_in; ++c) {
        layer.weight(r, c) = limit * (2.0 * uniform01(rng) - 1.0);
      }
    }
    layers_.push_back(std::move(layer));
  }
}

Mlp Mlp::zeros(std::vector<std::size_t> widths, Activation output_activation) {
  Mlp m(std::move(widths), output_activation, 0);
  for (auto& layer : m.layers_) {
    layer.weight.setZero();
    layer.bias.setZero();
  }
  return m;
}

Vector Mlp::forward(const Vector& input) const {
  if (static_cast<std::size_t>(input.size()) != input_size()) {
    throw ShapeError("input length " + std::to_string(input.size()) + " does not match Mlp input " +
                     std::to_string(input_size()));
  }
  Vector x = input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Vector z = layers_[l].weight * x + layers_[l].bias;
    const bool last = l + 1 == layers_.size();
    if (!last || output_activation_ == Activation::kRelu) z = z.cwiseMax(0.0);
    x = std::move(z);
  }
  return x;
}

Matrix Mlp::forward(const Matrix& batch, ForwardCache* cache) const {
  if (static_cast<std::size_t>(batch.rows()) != input_size()) {
    throw ShapeError("batch row count " + std::to_string(batch.rows()) + " does not match Mlp input " +
                     std::to_string(input_size()));
  }
  if (cache) {
    cache->inputs.resize(layers_.size());
    cache->preactivations.resize(layers_.size());
  }
  Matrix x = batch;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Matrix z(layers_[l].weight.rows(), x.cols());
    z.noalias() = layers_[l].weight * x;
    z.colwise() += layers_[l].bias;
    const bool last = l + 1 == layers_.size();
    if (cache) {
      cache->inputs[l] = std::move(x);
      cache->preactivations[l] = z;
    }
    if (!last || output_activation_ == Activation::kRelu) z = z.cwiseMax(0.0);
    x = std::move(z);
  }
  return x;
}

Matrix Mlp::backward(const ForwardCache& cache, const Matrix& output_gradient, Gradients& grads) const {
  if (cache.inputs.size() != layers_.size()) throw ShapeError("forward cache does not match model");
  if (static_cast<std::size_t>(output_gradient.rows()) != output_size() ||
      output_gradient.cols() != cache.inputs.back().cols()) {
    throw ShapeError("output gradient shape does not match forward batch");
  }
  if (grads.weight.size() != layers_.size()) throw ShapeError("gradient buffer does not match model");

  Matrix delta = output_gradient;
  if (output_activation_ == Activation::kRelu) {
    delta = delta.cwiseProduct((cache.preactivations.back().array() > 0.0).cast<double>().matrix());
  }
  for (std::size_t l = layers_.size(); l-- > 0;) {
    grads.weight[l].noalias() += delta * cache.inputs[l].transpose();
    grads.bias[l] += delta.rowwise().sum();
    Matrix upstream(layers_[l].weight.cols(), delta.cols());
    upstream.noalias() = layers_[l].weight.transpose() * delta;
    if (l > 0) {
      // ReLU subgradient at zero is zero.
      delta = upstream.cwiseProduct((cache.preactivations[l - 1].array() > 0.0).cast<double>().matrix());
    } else {
      delta = std::move(upstream);
    }
  }
  return delta;
}

Gradients Mlp::make_gradients() const {
  Gradients g;
  for (const auto& layer : layers_) {
    g.weight.push_back(Matrix::Zero(layer.weight.rows(), layer.weight.cols()));
    g.bias.push_back(Vector::Zero(layer.bias.size()));
  }
  return g;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += static_cast<std::size_t>(layer.weight.size() + layer.bias.size());
  return n;
}

std::vector<double> Mlp::flat_parameters() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto& layer : layers_) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) out.push_back(layer.weight(r, c));
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) out.push_back(layer.bias(r));
  }
  return out;
}

void Mlp::set_flat_parameters(std::span<const double> params) {
  if (params.size() != parameter_count()) {
    throw ShapeError("expected " + std::to_string(parameter_count()) + " parameters, got " +
                     std::to_string(params.size()));
  }
  std::size_t k = 0;
  for (auto& layer : layers_) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = params[k++];
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = params[k++];
  }
}

std::uint64_t Mlp::parameter_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double p : flat_parameters()) {
    std::uint64_t bits;
    std::memcpy(&bits, &p, sizeof bits);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

void Mlp::save(std::ostream& out) const {
  io::write_magic(out, kMlpMagic);
  io::write_u32(out, kMlpVersion);
  io::write_u32(out, static_cast<std::uint32_t>(output_activation_));
  io::write_u64(out, widths_.size());
  for (std::size_t w : widths_) io::write_u64(out, w);
  const auto params = flat_parameters();
  io::write_u64(out, params.size());
  for (double p : params) io::write_f64(out, p);
}

Mlp Mlp::load(std::istream& in) {
  io::expect_magic(in, kMlpMagic);
  const auto version = io::read_u32(in);
  if (version != kMlpVersion) throw IoError("unsupported Mlp checkpoint version " + std::to_string(version));
  const auto activation = io::read_u32(in);
  if (activation > 1) throw IoError("unknown output activation in checkpoint");
  const auto n_widths = io::read_u64(in);
  if (n_widths < 2 || n_widths > 64) throw IoError("implausible layer count in checkpoint");
  std::vector<std::size_t> widths(n_widths);
  for (auto& w : widths) w = io::read_u64(in);
  Mlp m = Mlp::zeros(widths, static_cast<Activation>(activation));
  const auto n_params = io::read_u64(in);
  if (n_params != m.parameter_count()) throw IoError("parameter count does not match architecture");
  std::vector<double> params(n_params);
  for (auto& p : params) p = io::read_f64(in);
  m.set_flat_parameters(params);
  return m;
}

Gradients gradients(const Mlp& model, const Vector& input, const Vector& output_gradient) {
  ForwardCache cache;
  model.forward(Matrix(input), &cache);
  Gradients g = model.make_gradients();
  model.backward(cache, Matrix(output_gradient), g);
  return g;
}

std::vector<double> flatten(const Gradients& grads) {
  std::vector<double> out;
  for (std::size_t l = 0; l < grads.weight.size(); ++l) {
    const auto& w = grads.weight[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) out.push_back(w(r, c));
    }
    for (Eigen::Index r = 0; r < grads.bias[l].size(); ++r) out.push_back(grads.bias[l](r));
  }
  return out;
}

Adam::Adam(const Mlp& model, AdamConfig config)
    : config_(config), m_(model.make_gradients()), v_(model.make_gradients()) {
  if (!(config.learning_rate > 0.0)) throw ArgumentError("learning rate must be positive");
}

void Adam::step(Mlp& model, const Gradients& grads) {
  auto& layers = model.layers();
  if (grads.weight.size() != layers.size() || m_.weight.size() != layers.size()) {
    throw ShapeError("gradient shapes do not match the model");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (grads.weight[l].rows() != layers[l].weight.rows() || grads.weight[l].cols() != layers[l].weight.cols() ||
        grads.bias[l].size() != layers[l].bias.size()) {
      throw ShapeError("gradient shape mismatch in layer " + std::to_string(l));
    }
    if (!grads.weight[l].allFinite() || !grads.bias[l].allFinite()) {
      throw NumericError("non-finite gradient in layer " + std::to_string(l));
    }
  }

  ++steps_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double t = static_cast<double>(steps_);
  const double step_size = config_.learning_rate / (1.0 - std::pow(b1, t));
  const double v_correction = 1.0 / (1.0 - std::pow(b2, t));
  const double eps = config_.epsilon;

  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    param.array() -= step_size * m.array() / ((v.array() * v_correction).sqrt() + eps);
  };
  for (std::size_t l = 0; l < layers.size(); ++l) {
    update(layers[l].weight, m_.weight[l], v_.weight[l], grads.weight[l]);
    update(layers[l].bias, m_.bias[l], v_.bias[l], grads.bias[l]);
  }
}

DuelingHead::DuelingHead(Mlp trunk, Mlp value, Mlp advantage)
    : trunk_(std::move(trunk)), value_(std::move(value)), advantage_(std::move(advantage)) {}

namespace {

std::vector<std::size_t> trunk_widths(std::size_t input_size, const std::vector<std::size_t>& hidden) {
  if (hidden.empty()) throw ShapeError("dueling trunk needs at least one hidden layer");
  std::vector<std::size_t> w{input_size};
  w.insert(w.end(), hidden.begin(), hidden.end());
  return w;
}

}  // namespace

DuelingHead::DuelingHead(std::size_t input_size, std::vector<std::size_t> trunk_hidden, std::size_t actions,
                         std::uint64_t seed)
    : DuelingHead(Mlp(trunk_widths(input_size, trunk_hidden), Activation::kRelu, derive_seed(seed, "trunk")),
                  Mlp({trunk_hidden.back(), 1}, Activation::kLinear, derive_seed(seed, "value")),
                  Mlp({trunk_hidden.back(), actions}, Activation::kLinear, derive_seed(seed, "advantage"))) {}

DuelingHead DuelingHead::zeros(std::size_t input_size, std::vector<std::size_t> trunk_hidden, std::size_t actions) {
  const std::size_t last = trunk_hidden.empty() ? 0 : trunk_hidden.back();
  return DuelingHead(Mlp::zeros(trunk_widths(input_size, trunk_hidden), Activation::kRelu),
                     Mlp::zeros({last, 1}, Activation::kLinear),
                     Mlp::zeros({last, actions}, Activation::kLinear));
}

Vector DuelingHead::q_values(const Vector& state) const {
  if (static_cast<std::size_t>(state.size()) != input_size()) {
    throw ShapeError("state length " + std::to_string(state.size()) + " does not match agent input " +
                     std::to_string(input_size()));
  }
  const Vector h = trunk_.forward(state);
  const double v = value_.forward(h)(0);
  const Vector a = advantage_.forward(h);
  return (a.array() - a.mean() + v).matrix();
}

Matrix DuelingHead::q_values(const Matrix& states, Cache* cache) const {
  const Matrix h = trunk_.forward(states, cache ? &cache->trunk : nullptr);
  const Matrix v = value_.forward(h, cache ? &cache->value : nullptr);
  Matrix a = advantage_.forward(h, cache ? &cache->advantage : nullptr);
  const Eigen::RowVectorXd shift = v.row(0) - a.colwise().mean();
  a.rowwise() += shift;
  return a;
}

double DuelingHead::state_value(const Vector& state) const { return value_.forward(trunk_.forward(state))(0); }

void DuelingHead::backward(const Cache& cache, const Matrix& q_gradient, Grads& grads) const {
  const auto k = static_cast<double>(actions());
  const Eigen::RowVectorXd total = q_gradient.colwise().sum();
  Matrix advantage_grad = q_gradient;
  advantage_grad.rowwise() -= total / k;
  Matrix hidden_grad = value_.backward(cache.value, Matrix(total), grads.value);
  hidden_grad += advantage_.backward(cache.advantage, advantage_grad, grads.advantage);
  trunk_.backward(cache.trunk, hidden_grad, grads.trunk);
}

DuelingHead::Grads DuelingHead::make_gradients() const {
  return Grads{trunk_.make_gradients(), value_.make_gradients(), advantage_.make_gradients()};
}

std::vector<double> DuelingHead::flat_parameters() const {
  auto out = trunk_.flat_parameters();
  const auto v = value_.flat_parameters();
  const auto a = advantage_.flat_parameters();
  out.insert(out.end(), v.begin(), v.end());
  out.insert(out.end(), a.begin(), a.end());
  return out;
}

void DuelingHead::set_flat_parameters(std::span<const double> params) {
  const std::size_t nt = trunk_.parameter_count();
  const std::size_t nv = value_.parameter_count();
  const std::size_t na = advantage_.parameter_count();
  if (params.size() != nt + nv + na) throw ShapeError("dueling parameter count mismatch");
  trunk_.set_flat_parameters(params.subspan(0, nt));
  value_.set_flat_parameters(params.subspan(nt, nv));
  advantage_.set_flat_parameters(params.subspan(nt + nv, na));
}

}  // namespace vopi::nn
