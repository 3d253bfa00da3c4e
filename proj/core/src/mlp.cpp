#include "crl/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace crl::policy {
namespace {

using Eigen::Map;
using Eigen::MatrixXd;

void activate(Activation act, MatrixXd& z) {
  if (act == Activation::Tanh) {
    z = z.array().tanh();
  } else {
    z = z.cwiseMax(0.0);
  }
}

// Derivative of the activation expressed through its output.
MatrixXd activation_slope(Activation act, const MatrixXd& a) {
  if (act == Activation::Tanh) return (1.0 - a.array().square()).matrix();
  return (a.array() > 0.0).cast<double>().matrix();
}

}  // namespace

std::string to_string(Activation activation) { return activation == Activation::Tanh ? "tanh" : "relu"; }

Activation activation_from_string(const std::string& name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "relu") return Activation::Relu;
  throw ConfigError("unknown activation '" + name + "'");
}

std::size_t MlpArchitecture::parameter_count() const {
  std::size_t total = 0;
  std::size_t in = input_dim;
  for (const auto h : hidden) {
    total += in * h + h;
    in = h;
  }
  return total + in * output_dim + output_dim;
}

Mlp::Mlp(MlpArchitecture architecture) : arch_(std::move(architecture)) {
  if (arch_.output_dim == 0) throw std::invalid_argument("Mlp: output_dim must be >= 1");
  Eigen::Index offset = 0;
  auto in = static_cast<Eigen::Index>(arch_.input_dim);
  auto add = [&](Eigen::Index out) {
    if (out == 0) throw std::invalid_argument("Mlp: hidden layers must be non-empty");
    layers_.push_back({in, out, offset, offset + in * out});
    offset += in * out + out;
    in = out;
  };
  for (const auto h : arch_.hidden) add(static_cast<Eigen::Index>(h));
  add(static_cast<Eigen::Index>(arch_.output_dim));
}

Eigen::VectorXd Mlp::initial_parameters(Rng& rng, double output_scale) const {
  Eigen::VectorXd params = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(parameter_count()));
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
    const double scale = l + 1 == layers_.size() ? output_scale : 1.0;
    std::uniform_real_distribution<double> uniform(-limit, limit);
    for (Eigen::Index i = 0; i < layer.in * layer.out; ++i) {
      params[layer.weight_offset + i] = scale * uniform(rng);
    }
  }
  return params;
}

MatrixXd Mlp::forward(const Eigen::VectorXd& params, const MatrixXd& inputs, Cache* cache) const {
  if (params.size() != static_cast<Eigen::Index>(parameter_count())) {
    throw std::invalid_argument("Mlp::forward: parameter vector has wrong size");
  }
  if (inputs.rows() != static_cast<Eigen::Index>(arch_.input_dim)) {
    throw std::invalid_argument("Mlp::forward: input dimension mismatch");
  }
  if (cache) {
    cache->activations.clear();
    cache->activations.push_back(inputs);
  }
  MatrixXd a = inputs;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    Map<const MatrixXd> w(params.data() + layer.weight_offset, layer.out, layer.in);
    Map<const Eigen::VectorXd> b(params.data() + layer.bias_offset, layer.out);
    MatrixXd z = w * a;
    z.colwise() += b;
    if (l + 1 < layers_.size()) activate(arch_.activation, z);
    a = std::move(z);
    if (cache && l + 1 < layers_.size()) cache->activations.push_back(a);
  }
  return a;
}

Eigen::VectorXd Mlp::backward(const Eigen::VectorXd& params, const Cache& cache, const MatrixXd& output_grad) const {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params.size());
  MatrixXd delta = output_grad;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const auto& layer = layers_[l];
    const MatrixXd& input = cache.activations[l];
    Map<MatrixXd> gw(grad.data() + layer.weight_offset, layer.out, layer.in);
    Map<Eigen::VectorXd> gb(grad.data() + layer.bias_offset, layer.out);
    gw.noalias() = delta * input.transpose();
    gb = delta.rowwise().sum();
    if (l > 0) {
      Map<const MatrixXd> w(params.data() + layer.weight_offset, layer.out, layer.in);
      MatrixXd back = w.transpose() * delta;
      delta = back.cwiseProduct(activation_slope(arch_.activation, input));
    }
  }
  return grad;
}

MatrixXd Mlp::jvp(const Eigen::VectorXd& params, const Cache& cache, const Eigen::VectorXd& direction) const {
  if (direction.size() != params.size()) throw std::invalid_argument("Mlp::jvp: direction has wrong size");
  const auto n = cache.activations.front().cols();
  MatrixXd tangent = MatrixXd::Zero(static_cast<Eigen::Index>(arch_.input_dim), n);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    Map<const MatrixXd> w(params.data() + layer.weight_offset, layer.out, layer.in);
    Map<const MatrixXd> dw(direction.data() + layer.weight_offset, layer.out, layer.in);
    Map<const Eigen::VectorXd> db(direction.data() + layer.bias_offset, layer.out);
    MatrixXd dz = dw * cache.activations[l];
    if (l > 0) dz.noalias() += w * tangent;
    dz.colwise() += db;
    if (l + 1 < layers_.size()) {
      tangent = dz.cwiseProduct(activation_slope(arch_.activation, cache.activations[l + 1]));
    } else {
      tangent = std::move(dz);
    }
  }
  return tangent;
}

}  // namespace crl::policy
