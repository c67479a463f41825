#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace vopi::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation : std::uint32_t { kLinear = 0, kRelu = 1 };

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
};

// Per-layer parameter gradients, same shapes as the owning Mlp.
struct Gradients {
  std::vector<Matrix> weight;
  std::vector<Vector> bias;

  void set_zero();
  bool all_zero() const;
};

// Activations recorded by a batched forward pass, consumed by backward().
struct ForwardCache {
  std::vector<Matrix> inputs;       // input to each layer, columns are samples
  std::vector<Matrix> preactivations;
};

// Feed-forward network. Hidden layers use ReLU; the output layer uses
// output_activation. Inputs and outputs are column vectors (batches are
// column-stacked).
class Mlp {
public:
  Mlp() = default;
  // He-uniform weights, zero biases.
  Mlp(std::vector<std::size_t> widths, Activation output_activation, std::uint64_t seed);
  static Mlp zeros(std::vector<std::size_t> widths, Activation output_activation);

  Vector forward(const Vector& input) const;
  Matrix forward(const Matrix& batch, ForwardCache* cache = nullptr) const;

  // Accumulates parameter gradients for the cached batch into grads (which
  // must be shaped by make_gradients) and returns the gradient w.r.t. input.
  Matrix backward(const ForwardCache& cache, const Matrix& output_gradient, Gradients& grads) const;

  Gradients make_gradients() const;

  const std::vector<std::size_t>& widths() const noexcept { return widths_; }
  std::size_t input_size() const { return widths_.front(); }
  std::size_t output_size() const { return widths_.back(); }
  Activation output_activation() const noexcept { return output_activation_; }
  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

  std::size_t parameter_count() const;
  // Order: layer by layer, weight (row-major) then bias.
  std::vector<double> flat_parameters() const;
  void set_flat_parameters(std::span<const double> params);
  std::uint64_t parameter_hash() const;

  void save(std::ostream& out) const;
  static Mlp load(std::istream& in);

private:
  std::vector<std::size_t> widths_;
  Activation output_activation_ = Activation::kLinear;
  std::vector<DenseLayer> layers_;
};

// Convenience single-sample gradient: runs forward and backward.
Gradients gradients(const Mlp& model, const Vector& input, const Vector& output_gradient);

// Flattens gradients in the same order as Mlp::flat_parameters.
std::vector<double> flatten(const Gradients& grads);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
public:
  Adam() = default;
  Adam(const Mlp& model, AdamConfig config);

  // Throws NumericError naming the layer if any gradient is non-finite; in
  // that case the model is left untouched.
  void step(Mlp& model, const Gradients& grads);

  std::uint64_t steps() const noexcept { return steps_; }
  const AdamConfig& config() const noexcept { return config_; }

private:
  AdamConfig config_;
  std::uint64_t steps_ = 0;
  Gradients m_;
  Gradients v_;
};

// Dueling Q-network: shared ReLU trunk, scalar value stream and advantage
// stream combined as Q = V + A - mean(A).
class DuelingHead {
public:
  struct Cache {
    ForwardCache trunk;
    ForwardCache value;
    ForwardCache advantage;
  };
  struct Grads {
    Gradients trunk;
    Gradients value;
    Gradients advantage;
  };

  DuelingHead() = default;
  DuelingHead(std::size_t input_size, std::vector<std::size_t> trunk_hidden, std::size_t actions,
              std::uint64_t seed);
  static DuelingHead zeros(std::size_t input_size, std::vector<std::size_t> trunk_hidden,
                           std::size_t actions);

  Vector q_values(const Vector& state) const;
  Matrix q_values(const Matrix& states, Cache* cache = nullptr) const;
  double state_value(const Vector& state) const;

  void backward(const Cache& cache, const Matrix& q_gradient, Grads& grads) const;
  Grads make_gradients() const;

  std::size_t actions() const { return advantage_.output_size(); }
  std::size_t input_size() const { return trunk_.input_size(); }

  Mlp& trunk() noexcept { return trunk_; }
  Mlp& value() noexcept { return value_; }
  Mlp& advantage() noexcept { return advantage_; }
  const Mlp& trunk() const noexcept { return trunk_; }
  const Mlp& value() const noexcept { return value_; }
  const Mlp& advantage() const noexcept { return advantage_; }

  std::vector<double> flat_parameters() const;
  void set_flat_parameters(std::span<const double> params);

private:
  DuelingHead(Mlp trunk, Mlp value, Mlp advantage);

  Mlp trunk_;
  Mlp value_;
  Mlp advantage_;
};

}  // namespace vopi::nn
