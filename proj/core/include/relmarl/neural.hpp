#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "relmarl/rng.hpp"

namespace relmarl {

/// Dimension or shape mismatch between a network and its inputs.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Checkpoint bytes that cannot be decoded.
class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fully connected layer. `weights` is inputs x outputs, row-major, so row
/// i holds the fan-out of input unit i.
struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Feed-forward Q-network: rectifier on every hidden layer, identity on the
/// output layer. One output per action.
class Mlp {
 public:
  Mlp() = default;
  /// Zero-initialized network with the given sizes (input, hidden..., output).
  explicit Mlp(std::vector<std::size_t> layer_sizes);

  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  std::size_t parameter_count() const;

  std::span<DenseLayer> layers() { return layers_; }
  std::span<const DenseLayer> layers() const { return layers_; }

  bool same_shape(const Mlp& other) const { return sizes_ == other.sizes_; }

  friend bool operator==(const Mlp&, const Mlp&) = default;

 private:
  std::vector<std::size_t> sizes_;
  std::vector<DenseLayer> layers_;
};

/// Gradient of a scalar with respect to every parameter of an Mlp; same
/// layout as the network it belongs to.
struct Gradients {
  std::vector<DenseLayer> layers;

  static Gradients zeros_like(const Mlp& net);
  friend bool operator==(const Gradients&, const Gradients&) = default;
};

/// Weights uniform on +-sqrt(6 / (fan_in + fan_out)), biases zero.
Mlp init_net(std::size_t input_dim, std::span<const std::size_t> hidden, std::size_t actions, Rng& rng);

/// Action values for one state.
std::vector<double> forward(const Mlp& net, std::span<const double> state);

/// Gradient of upstream * Q(state, action) with respect to all parameters.
Gradients backward(const Mlp& net, std::span<const double> state, std::size_t action, double upstream);

/// Per-layer activations of a batched forward pass, kept for backward_batch.
class ForwardCache {
 public:
  std::size_t rows() const { return rows_; }
  /// Action values of batch row `row`.
  std::span<const double> output(std::size_t row) const;

 private:
  friend void forward_batch(const Mlp&, std::span<const double>, std::size_t, ForwardCache&);
  friend void backward_batch(const Mlp&, ForwardCache&, std::span<const std::size_t>,
                             std::span<const double>, Gradients&);

  std::size_t rows_ = 0;
  std::vector<std::size_t> sizes_;
  // activations_[0] holds the inputs; activations_[k] the output of layer k.
  std::vector<std::vector<double>> activations_;
  std::vector<double> delta_;
  std::vector<double> delta_prev_;
  std::vector<double> scratch_;  // transposed weights
};

/// Forward pass over `rows` states stored row-major in `inputs`.
void forward_batch(const Mlp& net, std::span<const double> inputs, std::size_t rows, ForwardCache& cache);

/// Accumulates sum_r upstream[r] * dQ(row r, actions[r]) / dtheta into
/// `grads` (overwritten). `cache` must come from forward_batch on `net`.
void backward_batch(const Mlp& net, ForwardCache& cache, std::span<const std::size_t> actions,
                    std::span<const double> upstream, Gradients& grads);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam update of one parameter tensor at (1-based) `step`.
void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> first,
                 std::span<double> second, const AdamConfig& config, std::uint64_t step);

/// Adam moment accumulators for one network.
class AdamOptimizer {
 public:
  AdamOptimizer() = default;
  explicit AdamOptimizer(const Mlp& net, AdamConfig config = {});

  void step(Mlp& net, const Gradients& grads);

  std::uint64_t step_count() const { return steps_; }
  const AdamConfig& config() const { return config_; }
  const Gradients& first_moment() const { return first_; }
  const Gradients& second_moment() const { return second_; }

 private:
  AdamConfig config_;
  Gradients first_;
  Gradients second_;
  std::uint64_t steps_ = 0;
};

/// Overwrites dst's parameters with src's. Shapes must match.
void copy_into_target(const Mlp& src, Mlp& dst);

/// Checkpoint encoding: 4-byte magic "RQN1", u32 count of layer sizes, the
/// sizes as u32, then for each layer the weights (row-major) followed by the
/// biases, all as little-endian IEEE-754 doubles.
std::vector<std::uint8_t> serialize_net(const Mlp& net);
Mlp deserialize_net(std::span<const std::uint8_t> bytes);

void save_net(const Mlp& net, const std::filesystem::path& path);
Mlp load_net(const std::filesystem::path& path);

}  // namespace relmarl
