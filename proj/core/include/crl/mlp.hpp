#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "crl/types.hpp"

namespace crl::policy {

enum class Activation { Tanh, Relu };

std::string to_string(Activation activation);
Activation activation_from_string(const std::string& name);

struct MlpArchitecture {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden;
  std::size_t output_dim = 1;
  Activation activation = Activation::Tanh;

  std::size_t parameter_count() const;
  friend bool operator==(const MlpArchitecture&, const MlpArchitecture&) = default;
};

/// Fully connected network evaluated on a batch of column inputs.
///
/// The network holds no parameters: every call takes a flat parameter vector
/// laid out layer by layer as [W_0 (column-major), b_0, W_1, b_1, ...]. This
/// keeps line searches and finite differences free of copies of the network.
class Mlp {
 public:
  /// Activations of every layer for one batch; input is activations.front().
  struct Cache {
    std::vector<Eigen::MatrixXd> activations;
  };

  explicit Mlp(MlpArchitecture architecture);

  const MlpArchitecture& architecture() const { return arch_; }
  std::size_t parameter_count() const { return arch_.parameter_count(); }

  /// Glorot-uniform weights, zero biases; the output layer is scaled by `output_scale`.
  Eigen::VectorXd initial_parameters(Rng& rng, double output_scale = 0.01) const;

  /// inputs: input_dim x N. Returns output_dim x N.
  Eigen::MatrixXd forward(const Eigen::VectorXd& params, const Eigen::MatrixXd& inputs,
                          Cache* cache = nullptr) const;

  /// Gradient with respect to the parameters of sum_{i,o} output_grad(o,i) * output(o,i).
  Eigen::VectorXd backward(const Eigen::VectorXd& params, const Cache& cache,
                           const Eigen::MatrixXd& output_grad) const;

  /// Directional derivative of the outputs along `direction` (forward mode).
  Eigen::MatrixXd jvp(const Eigen::VectorXd& params, const Cache& cache, const Eigen::VectorXd& direction) const;

 private:
  struct Layer {
    Eigen::Index in;
    Eigen::Index out;
    Eigen::Index weight_offset;
    Eigen::Index bias_offset;
  };

  MlpArchitecture arch_;
  std::vector<Layer> layers_;
};

}  // namespace crl::policy
