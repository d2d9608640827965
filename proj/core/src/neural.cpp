#include "relmarl/neural.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace relmarl {
namespace {

constexpr std::uint8_t kMagic[4] = {'R', 'Q', 'N', '1'};

void check_sizes(const std::vector<std::size_t>& sizes) {
  if (sizes.size() < 2) throw ShapeError("network needs at least an input and an output size");
  for (std::size_t s : sizes) {
    if (s == 0) throw ShapeError("network dimensions must be positive");
  }
}

constexpr std::size_t kTile = 16;

// y[r] = x[r] * W + b for `rows` rows, W being in x out row-major and b
// optional. Blocks of four rows by kTile outputs keep their accumulators in
// registers for the whole input loop; each output still sums its inputs in
// index order.
void matmul_rows(const double* x, const double* w, const double* b, double* y, std::size_t rows, std::size_t in,
                 std::size_t out) {
  thread_local std::vector<double> zeros;
  if (b == nullptr) {
    if (zeros.size() < out) zeros.assign(out, 0.0);
    b = zeros.data();
  }
  const std::size_t tiled = out - out % kTile;

  std::size_t r = 0;
  for (; r + 4 <= rows; r += 4) {
    const double* x0 = x + (r + 0) * in;
    const double* x1 = x + (r + 1) * in;
    const double* x2 = x + (r + 2) * in;
    const double* x3 = x + (r + 3) * in;
    for (std::size_t o0 = 0; o0 < tiled; o0 += kTile) {
      double acc[4][kTile];
      for (auto& row : acc) std::copy_n(b + o0, kTile, row);
      for (std::size_t i = 0; i < in; ++i) {
        const double a0 = x0[i], a1 = x1[i], a2 = x2[i], a3 = x3[i];
        const double* wi = w + i * out + o0;
#pragma omp simd
        for (std::size_t o = 0; o < kTile; ++o) {
          const double wv = wi[o];
          acc[0][o] += a0 * wv;
          acc[1][o] += a1 * wv;
          acc[2][o] += a2 * wv;
          acc[3][o] += a3 * wv;
        }
      }
      for (std::size_t k = 0; k < 4; ++k) std::copy_n(acc[k], kTile, y + (r + k) * out + o0);
    }
    if (tiled == out) continue;
    for (std::size_t k = 0; k < 4; ++k) std::copy_n(b + tiled, out - tiled, y + (r + k) * out + tiled);
    for (std::size_t i = 0; i < in; ++i) {
      const double a[4] = {x0[i], x1[i], x2[i], x3[i]};
      const double* wi = w + i * out;
      for (std::size_t k = 0; k < 4; ++k) {
        double* yk = y + (r + k) * out;
        for (std::size_t o = tiled; o < out; ++o) yk[o] += a[k] * wi[o];
      }
    }
  }
  for (; r < rows; ++r) {
    double* yr = y + r * out;
    const double* xr = x + r * in;
    std::copy_n(b, out, yr);
    for (std::size_t i = 0; i < in; ++i) {
      const double a = xr[i];
      if (a == 0.0) continue;
      const double* wi = w + i * out;
#pragma omp simd
      for (std::size_t o = 0; o < out; ++o) yr[o] += a * wi[o];
    }
  }
}

void dense_forward(const DenseLayer& layer, const double* x, double* y, std::size_t rows, bool relu) {
  matmul_rows(x, layer.weights.data(), layer.bias.data(), y, rows, layer.inputs, layer.outputs);
  if (relu) {
    const std::size_t n = rows * layer.outputs;
#pragma omp simd
    for (std::size_t k = 0; k < n; ++k) y[k] = y[k] > 0.0 ? y[k] : 0.0;
  }
}

// g = sum over rows of outer(x[r], d[r]), i.e. X^T D, written over g. Blocks
// of four inputs by kTile outputs accumulate the rows in order.
void outer_accumulate(const double* x, const double* d, double* g, std::size_t rows, std::size_t in,
                      std::size_t out) {
  const std::size_t tiled = out - out % kTile;
  std::size_t i = 0;
  for (; i + 4 <= in; i += 4) {
    for (std::size_t o0 = 0; o0 < tiled; o0 += kTile) {
      double acc[4][kTile] = {};
      for (std::size_t r = 0; r < rows; ++r) {
        const double* xr = x + r * in + i;
        const double a0 = xr[0], a1 = xr[1], a2 = xr[2], a3 = xr[3];
        const double* dr = d + r * out + o0;
#pragma omp simd
        for (std::size_t o = 0; o < kTile; ++o) {
          const double dv = dr[o];
          acc[0][o] += a0 * dv;
          acc[1][o] += a1 * dv;
          acc[2][o] += a2 * dv;
          acc[3][o] += a3 * dv;
        }
      }
      for (std::size_t k = 0; k < 4; ++k) std::copy_n(acc[k], kTile, g + (i + k) * out + o0);
    }
    for (std::size_t k = 0; k < 4; ++k) {
      double* gk = g + (i + k) * out;
      std::fill(gk + tiled, gk + out, 0.0);
      for (std::size_t r = 0; r < rows; ++r) {
        const double a = x[r * in + i + k];
        for (std::size_t o = tiled; o < out; ++o) gk[o] += a * d[r * out + o];
      }
    }
  }
  for (; i < in; ++i) {
    double* gi = g + i * out;
    std::fill(gi, gi + out, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
      const double a = x[r * in + i];
      const double* dr = d + r * out;
#pragma omp simd
      for (std::size_t o = 0; o < out; ++o) gi[o] += a * dr[o];
    }
  }
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int k = 0; k < 8; ++k) out.push_back(static_cast<std::uint8_t>(bits >> (8 * k)));
}

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * k);
    return v;
  }

  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * k);
    return std::bit_cast<double>(v);
  }

  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw CheckpointError("checkpoint truncated at byte " + std::to_string(pos_));
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Mlp::Mlp(std::vector<std::size_t> layer_sizes) : sizes_(std::move(layer_sizes)) {
  check_sizes(sizes_);
  for (std::size_t k = 0; k + 1 < sizes_.size(); ++k) {
    DenseLayer layer;
    layer.inputs = sizes_[k];
    layer.outputs = sizes_[k + 1];
    layer.weights.assign(layer.inputs * layer.outputs, 0.0);
    layer.bias.assign(layer.outputs, 0.0);
    layers_.push_back(std::move(layer));
  }
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const DenseLayer& l : layers_) n += l.weights.size() + l.bias.size();
  return n;
}

Gradients Gradients::zeros_like(const Mlp& net) {
  Gradients g;
  for (const DenseLayer& l : net.layers()) {
    DenseLayer z;
    z.inputs = l.inputs;
    z.outputs = l.outputs;
    z.weights.assign(l.weights.size(), 0.0);
    z.bias.assign(l.bias.size(), 0.0);
    g.layers.push_back(std::move(z));
  }
  return g;
}

Mlp init_net(std::size_t input_dim, std::span<const std::size_t> hidden, std::size_t actions, Rng& rng) {
  std::vector<std::size_t> sizes{input_dim};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(actions);
  Mlp net(std::move(sizes));
  for (DenseLayer& layer : net.layers()) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.inputs + layer.outputs));
    for (double& w : layer.weights) w = rng.uniform(-limit, limit);
  }
  return net;
}

std::span<const double> ForwardCache::output(std::size_t row) const {
  const std::size_t width = sizes_.back();
  return std::span<const double>(activations_.back()).subspan(row * width, width);
}

void forward_batch(const Mlp& net, std::span<const double> inputs, std::size_t rows, ForwardCache& cache) {
  const auto& sizes = net.layer_sizes();
  if (inputs.size() != rows * net.input_size()) {
    throw ShapeError("forward: expected " + std::to_string(rows * net.input_size()) + " inputs, got " +
                     std::to_string(inputs.size()));
  }
  cache.rows_ = rows;
  cache.sizes_ = sizes;
  cache.activations_.resize(sizes.size());
  cache.activations_[0].assign(inputs.begin(), inputs.end());
  const auto layers = net.layers();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    auto& out = cache.activations_[k + 1];
    out.resize(rows * layers[k].outputs);
    dense_forward(layers[k], cache.activations_[k].data(), out.data(), rows, k + 1 < layers.size());
  }
}

void backward_batch(const Mlp& net, ForwardCache& cache, std::span<const std::size_t> actions,
                    std::span<const double> upstream, Gradients& grads) {
  const std::size_t rows = cache.rows_;
  if (cache.sizes_ != net.layer_sizes()) throw ShapeError("backward: cache was produced by a different network");
  if (actions.size() != rows || upstream.size() != rows) {
    throw ShapeError("backward: need one action and one upstream value per batch row");
  }
  const std::size_t n_actions = net.output_size();
  for (std::size_t a : actions) {
    if (a >= n_actions) throw ShapeError("backward: action index " + std::to_string(a) + " out of range");
  }
  if (grads.layers.size() != net.layers().size()) grads = Gradients::zeros_like(net);

  const auto layers = net.layers();
  const std::size_t last = layers.size() - 1;

  // Output layer: only the selected action's unit carries gradient.
  {
    const DenseLayer& layer = layers[last];
    DenseLayer& g = grads.layers[last];
    std::fill(g.weights.begin(), g.weights.end(), 0.0);
    std::fill(g.bias.begin(), g.bias.end(), 0.0);
    const std::vector<double>& in = cache.activations_[last];
    for (std::size_t r = 0; r < rows; ++r) {
      const double d = upstream[r];
      const std::size_t a = actions[r];
      const double* x = in.data() + r * layer.inputs;
      for (std::size_t i = 0; i < layer.inputs; ++i) g.weights[i * layer.outputs + a] += x[i] * d;
      g.bias[a] += d;
    }
    if (last > 0) {
      cache.delta_.assign(rows * layer.inputs, 0.0);
      for (std::size_t r = 0; r < rows; ++r) {
        const double d = upstream[r];
        const std::size_t a = actions[r];
        const double* x = in.data() + r * layer.inputs;
        double* dp = cache.delta_.data() + r * layer.inputs;
        for (std::size_t i = 0; i < layer.inputs; ++i) {
          dp[i] = x[i] > 0.0 ? layer.weights[i * layer.outputs + a] * d : 0.0;
        }
      }
    }
  }

  for (std::size_t k = last; k-- > 0;) {
    const DenseLayer& layer = layers[k];
    DenseLayer& g = grads.layers[k];
    const std::size_t in_n = layer.inputs;
    const std::size_t out_n = layer.outputs;
    const std::vector<double>& in = cache.activations_[k];
    const double* delta = cache.delta_.data();

    outer_accumulate(in.data(), delta, g.weights.data(), rows, in_n, out_n);
    std::fill(g.bias.begin(), g.bias.end(), 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
      const double* d = delta + r * out_n;
      double* gb = g.bias.data();
#pragma omp simd
      for (std::size_t o = 0; o < out_n; ++o) gb[o] += d[o];
    }

    if (k == 0) break;
    // delta_prev = (delta W^T) masked by the rectifier of this layer's input
    cache.scratch_.resize(in_n * out_n);
    for (std::size_t i = 0; i < in_n; ++i) {
      for (std::size_t o = 0; o < out_n; ++o) cache.scratch_[o * in_n + i] = layer.weights[i * out_n + o];
    }
    cache.delta_prev_.resize(rows * in_n);
    matmul_rows(delta, cache.scratch_.data(), nullptr, cache.delta_prev_.data(), rows, out_n, in_n);
    for (std::size_t j = 0; j < rows * in_n; ++j) {
      if (!(in[j] > 0.0)) cache.delta_prev_[j] = 0.0;
    }
    std::swap(cache.delta_, cache.delta_prev_);
  }
}

std::vector<double> forward(const Mlp& net, std::span<const double> state) {
  if (state.size() != net.input_size()) {
    throw ShapeError("forward: state has " + std::to_string(state.size()) + " entries, network expects " +
                     std::to_string(net.input_size()));
  }
  ForwardCache cache;
  forward_batch(net, state, 1, cache);
  const auto q = cache.output(0);
  return {q.begin(), q.end()};
}

Gradients backward(const Mlp& net, std::span<const double> state, std::size_t action, double upstream) {
  if (state.size() != net.input_size()) throw ShapeError("backward: state length does not match network input");
  if (action >= net.output_size()) throw ShapeError("backward: action index " + std::to_string(action) + " out of range");
  ForwardCache cache;
  forward_batch(net, state, 1, cache);
  Gradients grads = Gradients::zeros_like(net);
  const std::size_t actions[1] = {action};
  const double up[1] = {upstream};
  backward_batch(net, cache, actions, up, grads);
  return grads;
}

void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> first,
                 std::span<double> second, const AdamConfig& config, std::uint64_t step) {
  const std::size_t n = params.size();
  if (grads.size() != n || first.size() != n || second.size() != n) {
    throw ShapeError("adam: parameter, gradient and moment tensors differ in size");
  }
  const double b1 = config.beta1;
  const double b2 = config.beta2;
  const double t = static_cast<double>(step);
  const double step_size = config.learning_rate / (1.0 - std::pow(b1, t));
  const double root_c2 = std::sqrt(1.0 - std::pow(b2, t));
  const double eps = config.epsilon;
  double* p = params.data();
  const double* g = grads.data();
  double* m = first.data();
  double* v = second.data();
#pragma omp simd
  for (std::size_t k = 0; k < n; ++k) {
    m[k] = b1 * m[k] + (1.0 - b1) * g[k];
    v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
    p[k] -= step_size * m[k] / (std::sqrt(v[k]) / root_c2 + eps);
  }
}

AdamOptimizer::AdamOptimizer(const Mlp& net, AdamConfig config)
    : config_(config), first_(Gradients::zeros_like(net)), second_(Gradients::zeros_like(net)) {}

void AdamOptimizer::step(Mlp& net, const Gradients& grads) {
  const auto layers = net.layers();
  if (grads.layers.size() != layers.size() || first_.layers.size() != layers.size()) {
    throw ShapeError("adam: gradient set does not match network");
  }
  ++steps_;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    adam_update(layers[k].weights, grads.layers[k].weights, first_.layers[k].weights, second_.layers[k].weights,
                config_, steps_);
    adam_update(layers[k].bias, grads.layers[k].bias, first_.layers[k].bias, second_.layers[k].bias, config_,
                steps_);
  }
}

void copy_into_target(const Mlp& src, Mlp& dst) {
  if (!src.same_shape(dst)) throw ShapeError("copy_into_target: networks differ in shape");
  dst = src;
}

std::vector<std::uint8_t> serialize_net(const Mlp& net) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  const auto& sizes = net.layer_sizes();
  put_u32(out, static_cast<std::uint32_t>(sizes.size()));
  for (std::size_t s : sizes) put_u32(out, static_cast<std::uint32_t>(s));
  out.reserve(out.size() + 8 * net.parameter_count());
  for (const DenseLayer& l : net.layers()) {
    for (double w : l.weights) put_f64(out, w);
    for (double b : l.bias) put_f64(out, b);
  }
  return out;
}

Mlp deserialize_net(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw CheckpointError("checkpoint truncated before magic header");
  if (!std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    throw CheckpointError("bad checkpoint magic header");
  }
  ByteReader reader(bytes.subspan(4));
  const std::uint32_t count = reader.u32();
  if (count < 2 || count > 64) throw CheckpointError("checkpoint declares " + std::to_string(count) + " layer sizes");
  std::vector<std::size_t> sizes;
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::uint32_t s = reader.u32();
    if (s == 0) throw CheckpointError("checkpoint declares a zero-width layer");
    sizes.push_back(s);
  }
  Mlp net(std::move(sizes));
  for (DenseLayer& l : net.layers()) {
    for (double& w : l.weights) w = reader.f64();
    for (double& b : l.bias) b = reader.f64();
  }
  if (!reader.at_end()) throw CheckpointError("checkpoint has trailing bytes after the parameters");
  return net;
}

void save_net(const Mlp& net, const std::filesystem::path& path) {
  const auto bytes = serialize_net(net);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

Mlp load_net(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return deserialize_net(bytes);
}

}  // namespace relmarl
