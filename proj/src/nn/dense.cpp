#include "itdt/nn/dense.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "itdt/errors.hpp"

namespace itdt::nn {

std::size_t DenseNetwork::input_dim() const {
  return layers.empty() ? 0 : static_cast<std::size_t>(layers.front().weight.cols());
}

std::size_t DenseNetwork::output_dim() const {
  return layers.empty() ? 0 : static_cast<std::size_t>(layers.back().weight.rows());
}

std::vector<std::size_t> DenseNetwork::layer_sizes() const {
  std::vector<std::size_t> sizes;
  if (layers.empty()) return sizes;
  sizes.push_back(input_dim());
  for (const auto& layer : layers) sizes.push_back(static_cast<std::size_t>(layer.weight.rows()));
  return sizes;
}

std::size_t DenseNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += layer.weight.size() + layer.bias.size();
  return n;
}

ParameterSet zeros_like(const DenseNetwork& net) {
  ParameterSet out;
  out.reserve(net.layers.size());
  for (const auto& layer : net.layers) {
    out.push_back({Matrix::Zero(layer.weight.rows(), layer.weight.cols()),
                   Vector::Zero(layer.bias.size())});
  }
  return out;
}

DenseNetwork init_network(const std::vector<std::size_t>& layer_sizes,
                          Activation output_activation, std::uint64_t seed) {
  if (layer_sizes.size() < 2) throw ConfigError("a network needs at least two layer sizes");
  for (auto s : layer_sizes) {
    if (s == 0) throw ConfigError("layer sizes must be positive");
  }
  std::mt19937_64 rng(seed);
  DenseNetwork net;
  net.output_activation = output_activation;
  for (std::size_t k = 0; k + 1 < layer_sizes.size(); ++k) {
    const auto fan_in = static_cast<Eigen::Index>(layer_sizes[k]);
    const auto fan_out = static_cast<Eigen::Index>(layer_sizes[k + 1]);
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    DenseLayer layer{Matrix(fan_out, fan_in), Vector::Zero(fan_out)};
    // Row-major fill order so the draw sequence matches the checkpoint layout.
    for (Eigen::Index i = 0; i < fan_out; ++i) {
      for (Eigen::Index j = 0; j < fan_in; ++j) layer.weight(i, j) = dist(rng);
    }
    net.layers.push_back(std::move(layer));
  }
  return net;
}

namespace {

void apply_activation(Matrix& z, bool hidden, Activation out) {
  if (hidden) {
    z = z.cwiseMax(0.0);
  } else if (out == Activation::tanh) {
    z = z.array().tanh().matrix();
  }
}

}  // namespace

Matrix forward_batch(const DenseNetwork& net, const Matrix& inputs, ForwardCache* cache) {
  if (net.layers.empty()) throw ContractError("forward on an empty network");
  if (static_cast<std::size_t>(inputs.rows()) != net.input_dim()) {
    throw ContractError("forward: input has " + std::to_string(inputs.rows()) +
                        " rows, network expects " + std::to_string(net.input_dim()));
  }
  if (cache) {
    cache->activations.clear();
    cache->activations.reserve(net.layers.size() + 1);
    cache->activations.push_back(inputs);
  }
  Matrix a = inputs;
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    const auto& layer = net.layers[k];
    Matrix z = layer.weight * a;
    z.colwise() += layer.bias;
    apply_activation(z, k + 1 < net.layers.size(), net.output_activation);
    if (cache) cache->activations.push_back(z);
    a = std::move(z);
  }
  return a;
}

Vector forward(const DenseNetwork& net, const Vector& input) {
  return forward_batch(net, Matrix(input));
}

namespace {

Gradients backward_impl(const DenseNetwork& net, const ForwardCache& cache, const Matrix& upstream,
                        bool want_param_grads, const Matrix* extra_preact) {
  const std::size_t L = net.layers.size();
  if (cache.activations.size() != L + 1) throw ContractError("backward: stale forward cache");
  const Matrix& out = cache.activations.back();
  if (upstream.rows() != out.rows() || upstream.cols() != out.cols()) {
    throw ContractError("backward: upstream gradient shape does not match network output");
  }

  Gradients g;
  if (want_param_grads) g.params.resize(L);
  Matrix delta = upstream;
  if (net.output_activation == Activation::tanh) {
    delta.array() *= 1.0 - out.array().square();
  }
  if (extra_preact) {
    if (extra_preact->rows() != delta.rows() || extra_preact->cols() != delta.cols()) {
      throw ContractError("backward: pre-activation gradient shape does not match network output");
    }
    delta += *extra_preact;
  }
  for (std::size_t k = L; k-- > 0;) {
    const Matrix& a_in = cache.activations[k];
    if (want_param_grads) {
      g.params[k].weight = delta * a_in.transpose();
      g.params[k].bias = delta.rowwise().sum();
    }
    Matrix prev = net.layers[k].weight.transpose() * delta;
    if (k > 0) prev.array() *= (a_in.array() > 0.0).cast<double>();
    delta = std::move(prev);
  }
  g.input = std::move(delta);
  return g;
}

}  // namespace

Gradients backward(const DenseNetwork& net, const ForwardCache& cache, const Matrix& upstream,
                   bool want_param_grads) {
  return backward_impl(net, cache, upstream, want_param_grads, nullptr);
}

Gradients backward(const DenseNetwork& net, const ForwardCache& cache, const Matrix& upstream,
                   const Matrix& extra_preact) {
  return backward_impl(net, cache, upstream, true, &extra_preact);
}

Matrix output_preactivation(const DenseNetwork& net, const ForwardCache& cache) {
  if (cache.activations.size() != net.layers.size() + 1) {
    throw ContractError("output_preactivation: stale forward cache");
  }
  const auto& last = net.layers.back();
  Matrix z = last.weight * cache.activations[net.layers.size() - 1];
  z.colwise() += last.bias;
  return z;
}

Gradients backward(const DenseNetwork& net, const Vector& input, const Vector& upstream) {
  ForwardCache cache;
  (void)forward_batch(net, Matrix(input), &cache);
  return backward(net, cache, Matrix(upstream));
}

AdamState AdamState::for_network(const DenseNetwork& net, double lr) {
  AdamState s;
  s.m = zeros_like(net);
  s.v = zeros_like(net);
  s.lr = lr;
  return s;
}

void adam_step(DenseNetwork& net, const ParameterSet& grads, AdamState& state) {
  if (grads.size() != net.layers.size() || state.m.size() != net.layers.size()) {
    throw ContractError("adam_step: parameter/gradient/moment shapes differ");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
    if (p.size() != g.size()) throw ContractError("adam_step: gradient shape mismatch");
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
    p.array() -= state.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + state.eps);
  };
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    update(net.layers[k].weight, grads[k].weight, state.m[k].weight, state.v[k].weight);
    update(net.layers[k].bias, grads[k].bias, state.m[k].bias, state.v[k].bias);
  }
}

void soft_update(DenseNetwork& target, const DenseNetwork& online, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("soft_update: tau must lie in [0, 1]");
  if (target.layer_sizes() != online.layer_sizes()) {
    throw ContractError("soft_update: target and online shapes differ");
  }
  for (std::size_t k = 0; k < target.layers.size(); ++k) {
    auto& t = target.layers[k];
    const auto& o = online.layers[k];
    t.weight = tau * o.weight + (1.0 - tau) * t.weight;
    t.bias = tau * o.bias + (1.0 - tau) * t.bias;
  }
}

void scale(ParameterSet& params, double factor) {
  for (auto& layer : params) {
    layer.weight *= factor;
    layer.bias *= factor;
  }
}

nlohmann::json to_checkpoint(const DenseNetwork& net) {
  nlohmann::json j;
  j["format"] = "itdt-dense";
  j["version"] = kCheckpointVersion;
  j["layer_sizes"] = net.layer_sizes();
  j["output_activation"] = net.output_activation == Activation::tanh ? "tanh" : "identity";
  auto weights = nlohmann::json::array();
  auto biases = nlohmann::json::array();
  for (const auto& layer : net.layers) {
    std::vector<double> w;
    w.reserve(layer.weight.size());
    for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) w.push_back(layer.weight(i, c));
    }
    weights.push_back(std::move(w));
    biases.push_back(std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size()));
  }
  j["weights"] = std::move(weights);
  j["biases"] = std::move(biases);
  return j;
}

DenseNetwork from_checkpoint(const nlohmann::json& j) {
  try {
    if (j.at("format") != "itdt-dense") throw ConfigError("not a dense-network checkpoint");
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw ConfigError("unsupported checkpoint version " + j.at("version").dump());
    }
    const auto sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
    const auto act = j.at("output_activation").get<std::string>();
    if (act != "tanh" && act != "identity") throw ConfigError("unknown activation " + act);
    if (sizes.size() < 2) throw ConfigError("checkpoint needs at least two layer sizes");
    const auto& weights = j.at("weights");
    const auto& biases = j.at("biases");
    if (weights.size() + 1 != sizes.size() || biases.size() + 1 != sizes.size()) {
      throw ConfigError("checkpoint layer count does not match layer_sizes");
    }
    DenseNetwork net;
    net.output_activation = act == "tanh" ? Activation::tanh : Activation::identity;
    for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
      const auto rows = static_cast<Eigen::Index>(sizes[k + 1]);
      const auto cols = static_cast<Eigen::Index>(sizes[k]);
      const auto w = weights[k].get<std::vector<double>>();
      const auto b = biases[k].get<std::vector<double>>();
      if (w.size() != static_cast<std::size_t>(rows * cols) ||
          b.size() != static_cast<std::size_t>(rows)) {
        throw ConfigError("checkpoint layer " + std::to_string(k) + " has wrong size");
      }
      DenseLayer layer{Matrix(rows, cols), Vector(rows)};
      for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index c = 0; c < cols; ++c) layer.weight(i, c) = w[i * cols + c];
        layer.bias(i) = b[i];
      }
      net.layers.push_back(std::move(layer));
    }
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_network(const DenseNetwork& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ContractError("cannot write checkpoint " + path);
  out << to_checkpoint(net).dump() << '\n';
}

DenseNetwork load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse checkpoint " + path + ": " + e.what());
  }
  return from_checkpoint(j);
}

bool identical(const DenseNetwork& a, const DenseNetwork& b) {
  if (a.output_activation != b.output_activation || a.layer_sizes() != b.layer_sizes()) {
    return false;
  }
  for (std::size_t k = 0; k < a.layers.size(); ++k) {
    if (a.layers[k].weight != b.layers[k].weight || a.layers[k].bias != b.layers[k].bias) {
      return false;
    }
  }
  return true;
}

}  // namespace itdt::nn
