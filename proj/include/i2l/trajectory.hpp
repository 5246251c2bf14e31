#pragma once

#include <Eigen/Dense>

#include <optional>

namespace i2l {

// One episode. States (and actions, when present) are stored column-wise:
// column t is s_t / a_t. Expert demonstrations carry states only.
struct Trajectory {
  Eigen::MatrixXd states;
  std::optional<Eigen::MatrixXd> actions;
  // Training rewards (imitation rewards, or env rewards for expert PPO).
  std::optional<Eigen::VectorXd> rewards;
  // True environment rewards, for evaluation only.
  std::optional<Eigen::VectorXd> env_rewards;

  // Recorded by the collecting policy; empty for demos.
  Eigen::VectorXd log_probs;
  Eigen::VectorXd values;
  // Observation after the last step and V of it (episodes end on time limit).
  std::optional<Eigen::VectorXd> final_state;
  double bootstrap_value = 0.0;

  Eigen::Index length() const { return states.cols(); }
  bool has_actions() const { return actions.has_value(); }

  // Throws ContractError when paired sequences disagree in length or any entry
  // is non-finite.
  void validate() const;
};

}  // namespace i2l
