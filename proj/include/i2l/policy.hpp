#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "i2l/nn.hpp"
#include "i2l/rng.hpp"

namespace i2l {
struct RolloutBatch;
}

namespace i2l::policy {

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

// Diagonal Gaussian with a state-independent log standard deviation. Actions
// are not squashed; the environment clamps them.
class GaussianPolicy {
 public:
  GaussianPolicy() = default;
  GaussianPolicy(nn::Network mean_net, Eigen::VectorXd log_std);
  static GaussianPolicy create(int state_dim, int action_dim, Rng& rng, int width = 64);

  int state_dim() const { return mean_net_.input_dim(); }
  int action_dim() const { return mean_net_.output_dim(); }

  Eigen::VectorXd mean(const Eigen::VectorXd& state) const { return mean_net_.forward(state); }
  Eigen::MatrixXd mean_batch(const Eigen::MatrixXd& states) const { return mean_net_.forward_batch(states); }
  Eigen::VectorXd std_dev() const { return log_std_.array().exp(); }

  double log_prob(const Eigen::VectorXd& state, const Eigen::VectorXd& action) const;
  Eigen::VectorXd log_prob_batch(const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions) const;
  // Differential entropy; state-independent.
  double entropy() const;

  const nn::Network& mean_net() const { return mean_net_; }
  nn::Network& mean_net() { return mean_net_; }
  const Eigen::VectorXd& log_std() const { return log_std_; }
  // Stores log_std clamped to [kLogStdMin, kLogStdMax].
  void set_log_std(const Eigen::VectorXd& log_std);

  // Mean-net parameters followed by log_std.
  std::size_t parameter_count() const;
  Eigen::VectorXd flat_parameters() const;
  void set_flat_parameters(const Eigen::VectorXd& flat);

  void save(std::ostream& out) const;
  static GaussianPolicy load(std::istream& in);

 private:
  nn::Network mean_net_;
  Eigen::VectorXd log_std_;
};

// log N(action; mean, diag(exp(log_std))^2), evaluated per column.
Eigen::VectorXd gaussian_log_density(const Eigen::MatrixXd& means, const Eigen::VectorXd& log_std,
                                     const Eigen::MatrixXd& actions);

// Gradient of sum_i weights_i * log pi(a_i | s_i) with respect to the mean
// net and log_std.
struct LogProbGradients {
  nn::Gradients mean_grads;
  Eigen::VectorXd log_std_grad;
};
LogProbGradients log_prob_gradients(const GaussianPolicy& policy, const Eigen::MatrixXd& states,
                                    const Eigen::MatrixXd& actions, const Eigen::VectorXd& weights);

struct ActionSample {
  Eigen::VectorXd action;
  double log_prob = 0.0;
};

ActionSample sample(const GaussianPolicy& policy, const Eigen::VectorXd& state, Rng& rng);
ActionSample sample(const GaussianPolicy& policy, const Eigen::VectorXd& state, std::uint64_t seed);

struct ValueFunction {
  nn::Network net;

  static ValueFunction create(int state_dim, Rng& rng, int width = 64);
  double value(const Eigen::VectorXd& state) const { return net.forward(state)[0]; }
  Eigen::VectorXd values(const Eigen::MatrixXd& states) const {
    return net.forward_batch(states).row(0).transpose();
  }
};

struct PpoConfig {
  double learning_rate = 1e-4;
  double clip_eps = 0.2;
  int epochs = 10;
  int minibatch_size = 64;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
  // Global gradient-norm clip per minibatch; <= 0 disables it.
  double max_grad_norm = 0.5;
};

// Gradient of the full PPO loss (to be minimised) with respect to each block.
struct PpoLoss {
  double loss = 0.0;
  double surrogate = 0.0;   // mean of min(rho A, clip(rho) A)
  double value_loss = 0.0;  // mean squared error
  double entropy = 0.0;
  double clip_fraction = 0.0;
  nn::Gradients mean_grads;
  Eigen::VectorXd log_std_grad;
  nn::Gradients value_grads;
};

// loss = -surrogate + value_coef * value_mse - entropy_coef * entropy on the
// records selected by `indices` (all records when empty).
PpoLoss ppo_loss(const GaussianPolicy& policy, const ValueFunction& value_fn, const RolloutBatch& batch,
                 const PpoConfig& config, const std::vector<Eigen::Index>& indices = {});

struct PpoStats {
  double surrogate = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  int gradient_steps = 0;
};

// Holds the two Adam states across updates.
class PpoLearner {
 public:
  PpoLearner(const GaussianPolicy& policy, const ValueFunction& value_fn, PpoConfig config);

  // Shuffled minibatch epochs over the batch. A non-finite loss restores the
  // parameters held at entry and rethrows NumericError.
  PpoStats update(GaussianPolicy& policy, ValueFunction& value_fn, const RolloutBatch& batch, Rng& rng);

  const PpoConfig& config() const { return config_; }

 private:
  PpoConfig config_;
  nn::Optimizer policy_opt_;
  nn::Optimizer value_opt_;
};

void save_policy(const GaussianPolicy& policy, const std::filesystem::path& path);
GaussianPolicy load_policy(const std::filesystem::path& path);

}  // namespace i2l::policy
