#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "i2l/envs.hpp"
#include "i2l/policy.hpp"
#include "i2l/trajectory.hpp"

namespace i2l {

// Flattened transitions of one PPO update, one column / entry per record.
struct RolloutBatch {
  Eigen::MatrixXd states;
  Eigen::MatrixXd actions;
  Eigen::VectorXd log_probs;
  Eigen::VectorXd values;
  Eigen::VectorXd rewards;
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;
  std::vector<bool> dones;

  Eigen::Index size() const { return states.cols(); }
};

namespace rollout {

struct CollectOptions {
  bool deterministic = false;  // act with the policy mean
};

// Runs n_steps / episode_length complete episodes. Episode e is reset from
// derive_seed(seed, e) and samples its noise from an independent stream, so the
// result does not depend on collection order. Records log-probs, values and the
// bootstrap value; true rewards go to env_rewards only.
std::vector<Trajectory> collect(const policy::GaussianPolicy& policy, const policy::ValueFunction& value_fn,
                                const envs::EnvSpec& spec, const envs::DynamicsConfig& config, int n_steps,
                                std::uint64_t seed, CollectOptions options = {});

// One episode per seed, without a value function (evaluation and demos).
Trajectory run_episode(const policy::GaussianPolicy& policy, const envs::EnvSpec& spec,
                       const envs::DynamicsConfig& config, std::uint64_t seed, bool deterministic);

// Uniform random actions in [-1, 1]; the first-round BCO exploration policy.
Trajectory random_episode(const envs::EnvSpec& spec, const envs::DynamicsConfig& config, std::uint64_t seed);

struct GaeResult {
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;
};

// delta_t = r_t + gamma V_{t+1} - V_t with V_T := last_value,
// A_t = sum_k (gamma lambda)^k delta_{t+k}, return_t = A_t + V_t.
GaeResult compute_gae(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values, double last_value,
                      double gamma, double lambda);

struct BatchOptions {
  double gamma = 0.99;
  double lambda = 0.95;
  bool normalize_advantages = true;
};

// Uses each trajectory's `rewards` (must be set) and bootstrap_value.
RolloutBatch build_batch(const std::vector<Trajectory>& trajectories, const BatchOptions& options);

// Mean true return of deterministic-mode episodes reset from the given seeds.
double evaluate(const policy::GaussianPolicy& policy, const envs::EnvSpec& spec,
                const envs::DynamicsConfig& config, const std::vector<std::uint64_t>& seeds);

// Demo files. State-only: "demo v1 <state_dim> <n_states>" then one state per
// line. With actions: "demo-sa v1 <state_dim> <action_dim> <n_states>" then
// state values followed by action values on each line.
struct Demo {
  Eigen::MatrixXd states;
  std::optional<Eigen::MatrixXd> actions;

  Eigen::Index size() const { return states.cols(); }
};

void write_demo(std::ostream& out, const Demo& demo);
Demo read_demo(std::istream& in);
void save_demo(const Demo& demo, const std::filesystem::path& path);
Demo load_demo(const std::filesystem::path& path);

// Splits demo states into consecutive episodes of episode_length (the last
// one may be shorter).
std::vector<Eigen::MatrixXd> split_episodes(const Eigen::MatrixXd& states, int episode_length);

}  // namespace rollout
}  // namespace i2l
