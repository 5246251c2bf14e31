#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <vector>

#include "i2l/rng.hpp"

// Dense tanh MLPs with exact reverse-mode gradients and the two optimizers
// used across the trainers. Batches are column-major: one sample per column.
namespace i2l::nn {

enum class Activation { tanh, identity };

struct Layer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

// Same shapes as the network's layers.
struct Gradients {
  std::vector<Layer> layers;

  Gradients& operator+=(const Gradients& other);
  Gradients& operator*=(double scale);
  Eigen::VectorXd flatten() const;
  double squared_norm() const;
};

// Per-layer activations recorded by a forward pass; activations[0] is the
// input batch and activations.back() the network output.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> activations;
};

class Network {
 public:
  Network() = default;
  Network(std::vector<Layer> layers, Activation hidden = Activation::tanh,
          Activation output = Activation::identity);

  // Glorot-uniform weights, zero biases. hidden lists the hidden widths.
  static Network mlp(int input_dim, const std::vector<int>& hidden, int output_dim, Rng& rng);
  // Two tanh hidden layers of `width` units and a linear output.
  static Network standard(int input_dim, int output_dim, Rng& rng, int width = 64);

  int input_dim() const;
  int output_dim() const;
  std::size_t layer_count() const { return layers_.size(); }
  std::size_t parameter_count() const;

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& inputs) const;
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& inputs, ForwardCache& cache) const;

  // Back-propagates d(loss)/d(output) (same shape as the forward output)
  // through the cached pass.
  Gradients backward(const ForwardCache& cache, const Eigen::MatrixXd& output_grad) const;

  Gradients zero_gradients() const;
  Eigen::VectorXd flat_parameters() const;
  void set_flat_parameters(const Eigen::VectorXd& flat);
  // Clamps every weight and bias into [-bound, bound].
  void clip_parameters(double bound);
  double max_abs_parameter() const;
  bool all_finite() const;

  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& mutable_layers() { return layers_; }
  Activation hidden_activation() const { return hidden_; }
  Activation output_activation() const { return output_; }

  // Text format: "mlp v1 <n_layers> <hidden> <output>", the layer dims, then
  // each layer's weight rows followed by its bias, at round-trip precision.
  void save(std::ostream& out) const;
  static Network load(std::istream& in);

  friend bool operator==(const Network& a, const Network& b);

 private:
  void check_chain() const;

  std::vector<Layer> layers_;
  Activation hidden_ = Activation::tanh;
  Activation output_ = Activation::identity;
};

// Loss as a function of the network's batch output: returns the scalar and
// its derivative with respect to every output entry.
struct LossAndOutputGrad {
  double loss = 0.0;
  Eigen::MatrixXd output_grad;
};
using OutputLoss = std::function<LossAndOutputGrad(const Eigen::MatrixXd& outputs)>;

struct Evaluated {
  double loss = 0.0;
  Gradients grads;
};

// Forward on `inputs`, evaluate `loss` on the outputs, back-propagate.
// Throws NumericError when the loss is not finite.
Evaluated gradients(const Network& net, const Eigen::MatrixXd& inputs, const OutputLoss& loss);

enum class OptimizerKind { adam, rmsprop };

class Optimizer {
 public:
  static constexpr double kAdamBeta1 = 0.9;
  static constexpr double kAdamBeta2 = 0.999;
  static constexpr double kRmsDecay = 0.99;
  static constexpr double kEps = 1e-8;

  Optimizer() = default;
  Optimizer(OptimizerKind kind, double learning_rate, std::size_t parameter_count);
  static Optimizer adam(double learning_rate, std::size_t parameter_count) {
    return {OptimizerKind::adam, learning_rate, parameter_count};
  }
  static Optimizer rmsprop(double learning_rate, std::size_t parameter_count) {
    return {OptimizerKind::rmsprop, learning_rate, parameter_count};
  }

  // Descends: params -= update(grads).
  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grads);
  void step(Network& net, const Gradients& grads);

  OptimizerKind kind() const { return kind_; }
  double learning_rate() const { return lr_; }
  long step_count() const { return t_; }
  std::size_t size() const { return static_cast<std::size_t>(second_.size()); }

 private:
  OptimizerKind kind_ = OptimizerKind::adam;
  double lr_ = 1e-3;
  long t_ = 0;
  Eigen::VectorXd first_;   // Adam m
  Eigen::VectorXd second_;  // Adam v / RMSProp mean square
};

void save_network(const Network& net, const std::filesystem::path& path);
Network load_network(const std::filesystem::path& path);

}  // namespace i2l::nn
