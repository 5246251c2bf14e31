#include "i2l/wcritic.hpp"

#include <cmath>

#include "i2l/errors.hpp"

namespace i2l::wcritic {

WassersteinCritic WassersteinCritic::create(int input_dim, StateNormalizer normalizer, Rng& rng, double clip_bound,
                                            double learning_rate, int width) {
  if (!(clip_bound > 0.0)) throw ContractError("critic: clip_bound must be positive");
  if (normalizer.dim() != input_dim) throw ContractError("critic: normalizer dim != input dim");
  WassersteinCritic c{nn::Network::standard(input_dim, 1, rng, width), std::move(normalizer), clip_bound, {}};
  c.g.clip_parameters(clip_bound);
  c.optimizer = nn::Optimizer::rmsprop(learning_rate, c.g.parameter_count());
  return c;
}

Eigen::VectorXd WassersteinCritic::values(const Eigen::MatrixXd& states) const {
  return g.forward_batch(normalizer.apply(states)).row(0).transpose();
}

CriticObjective critic_objective(const WassersteinCritic& critic, const Eigen::MatrixXd& expert_states,
                                 const Eigen::MatrixXd& buffer_states) {
  if (expert_states.cols() == 0 || buffer_states.cols() == 0) throw PreconditionError("critic: empty batch");
  // The two halves go through separate, identically-ordered passes so that
  // identical batches cancel exactly.
  auto half = [&](const Eigen::MatrixXd& states, double sign, double& mean_out) {
    nn::ForwardCache cache;
    const Eigen::MatrixXd g = critic.g.forward_batch(critic.normalizer.apply(states), cache);
    const double n = static_cast<double>(states.cols());
    mean_out = g.sum() / n;
    return critic.g.backward(cache, Eigen::MatrixXd::Constant(1, states.cols(), -sign / n));
  };
  double expert_mean = 0.0, buffer_mean = 0.0;
  CriticObjective out;
  out.grads = half(expert_states, 1.0, expert_mean);
  out.grads += half(buffer_states, -1.0, buffer_mean);
  out.objective = expert_mean - buffer_mean;
  if (!std::isfinite(out.objective)) throw NumericError("critic: non-finite objective", out.objective);
  return out;
}

double critic_update(WassersteinCritic& critic, const Eigen::MatrixXd& expert_states,
                     const Eigen::MatrixXd& buffer_states, int steps) {
  for (int k = 0; k < steps; ++k) {
    CriticObjective o = critic_objective(critic, expert_states, buffer_states);
    critic.optimizer.step(critic.g, o.grads);
    critic.g.clip_parameters(critic.clip_bound);
  }
  return w1_estimate(critic, expert_states, buffer_states);
}

double w1_estimate(const WassersteinCritic& critic, const Eigen::MatrixXd& expert_states,
                   const Eigen::MatrixXd& buffer_states) {
  if (expert_states.cols() == 0 || buffer_states.cols() == 0) throw PreconditionError("w1_estimate: empty batch");
  const double e = critic.values(expert_states).sum() / static_cast<double>(expert_states.cols());
  const double b = critic.values(buffer_states).sum() / static_cast<double>(buffer_states.cols());
  return e - b;
}

double score_trajectory(const WassersteinCritic& critic, const Trajectory& traj) {
  if (traj.length() == 0) throw ContractError("score_trajectory: empty trajectory");
  return critic.values(traj.states).sum() / static_cast<double>(traj.length());
}

}  // namespace i2l::wcritic
