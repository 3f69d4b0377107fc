#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace itdt::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation { identity, tanh };

/// weight is fan_out x fan_in; bias has fan_out entries.
struct DenseLayer {
  Matrix weight;
  Vector bias;
};

/// Fully connected network with rectifier hidden layers.
///
/// A plain value type: copying yields an independent network. Batched inputs
/// are column-per-sample matrices (input_dim x batch).
struct DenseNetwork {
  std::vector<DenseLayer> layers;
  Activation output_activation = Activation::identity;

  [[nodiscard]] std::size_t input_dim() const;
  [[nodiscard]] std::size_t output_dim() const;
  [[nodiscard]] std::vector<std::size_t> layer_sizes() const;
  [[nodiscard]] std::size_t parameter_count() const;
};

/// Same shape as a network's layers; used for gradients and optimizer moments.
using ParameterSet = std::vector<DenseLayer>;

[[nodiscard]] ParameterSet zeros_like(const DenseNetwork& net);

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
[[nodiscard]] DenseNetwork init_network(const std::vector<std::size_t>& layer_sizes,
                                        Activation output_activation, std::uint64_t seed);

/// Post-activation values of every layer, activations[0] being the input.
struct ForwardCache {
  std::vector<Matrix> activations;
};

[[nodiscard]] Vector forward(const DenseNetwork& net, const Vector& input);
[[nodiscard]] Matrix forward_batch(const DenseNetwork& net, const Matrix& inputs,
                                   ForwardCache* cache = nullptr);

struct Gradients {
  ParameterSet params;  ///< summed over the batch
  Matrix input;         ///< input_dim x batch
};

/// Reverse-mode gradients of sum_b <upstream_b, net(x_b)> with respect to the
/// parameters and inputs, given the cache of a matching forward_batch call.
[[nodiscard]] Gradients backward(const DenseNetwork& net, const ForwardCache& cache,
                                 const Matrix& upstream, bool want_param_grads = true);
/// As above, plus extra_preact added to the gradient at the output layer's
/// pre-activation (after the output nonlinearity's derivative is applied).
[[nodiscard]] Gradients backward(const DenseNetwork& net, const ForwardCache& cache,
                                 const Matrix& upstream, const Matrix& extra_preact);
/// Output-layer pre-activations W x + b for a cached forward pass.
[[nodiscard]] Matrix output_preactivation(const DenseNetwork& net, const ForwardCache& cache);
[[nodiscard]] Gradients backward(const DenseNetwork& net, const Vector& input,
                                 const Vector& upstream);

struct AdamState {
  ParameterSet m;
  ParameterSet v;
  std::uint64_t step = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  [[nodiscard]] static AdamState for_network(const DenseNetwork& net, double lr);
};

/// One bias-corrected Adam descent step on net's parameters.
void adam_step(DenseNetwork& net, const ParameterSet& grads, AdamState& state);

/// target <- tau * online + (1 - tau) * target.
void soft_update(DenseNetwork& target, const DenseNetwork& online, double tau);

void scale(ParameterSet& params, double factor);

// Checkpoints: {"format":"itdt-dense","version":1,"layer_sizes":[...],
// "output_activation":"tanh","weights":[row-major per layer],"biases":[...]}.
inline constexpr int kCheckpointVersion = 1;
[[nodiscard]] nlohmann::json to_checkpoint(const DenseNetwork& net);
[[nodiscard]] DenseNetwork from_checkpoint(const nlohmann::json& j);
void save_network(const DenseNetwork& net, const std::string& path);
[[nodiscard]] DenseNetwork load_network(const std::string& path);

[[nodiscard]] bool identical(const DenseNetwork& a, const DenseNetwork& b);

}  // namespace itdt::nn
