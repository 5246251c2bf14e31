#pragma once

#include <Eigen/Dense>

#include "i2l/nn.hpp"
#include "i2l/normalizer.hpp"
#include "i2l/rng.hpp"
#include "i2l/trajectory.hpp"

// Weight-clipped Wasserstein critic g_phi over states and the trajectory
// score derived from it.
namespace i2l::wcritic {

inline constexpr double kCriticLearningRate = 5e-5;
inline constexpr int kCriticSteps = 20;
inline constexpr double kClipBound = 0.01;

// Invariant: every parameter of g lies in [-clip_bound, clip_bound], from
// construction onwards.
struct WassersteinCritic {
  nn::Network g;
  StateNormalizer normalizer;
  double clip_bound = kClipBound;
  nn::Optimizer optimizer;

  static WassersteinCritic create(int input_dim, StateNormalizer normalizer, Rng& rng,
                                  double clip_bound = kClipBound, double learning_rate = kCriticLearningRate,
                                  int width = 64);

  Eigen::VectorXd values(const Eigen::MatrixXd& states) const;
};

// E_expert[g] - E_buffer[g] and the gradient of its negation.
struct CriticObjective {
  double objective = 0.0;
  nn::Gradients grads;
};
CriticObjective critic_objective(const WassersteinCritic& critic, const Eigen::MatrixXd& expert_states,
                                 const Eigen::MatrixXd& buffer_states);

// `steps` RMSProp steps ascending the duality objective, clipping all
// parameters after each step. Returns the objective after the last step.
double critic_update(WassersteinCritic& critic, const Eigen::MatrixXd& expert_states,
                     const Eigen::MatrixXd& buffer_states, int steps = kCriticSteps);

// E_expert[g] - E_buffer[g] under the current critic.
double w1_estimate(const WassersteinCritic& critic, const Eigen::MatrixXd& expert_states,
                   const Eigen::MatrixXd& buffer_states);

// Mean critic value over the trajectory's states.
double score_trajectory(const WassersteinCritic& critic, const Trajectory& traj);

}  // namespace i2l::wcritic
