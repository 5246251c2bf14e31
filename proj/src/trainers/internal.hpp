#pragma once

// Shared plumbing for the training loops; not part of the public headers.

#include <filesystem>
#include <string>
#include <vector>

#include "i2l/rng.hpp"
#include "i2l/trainers.hpp"

namespace i2l::trainers::detail {

// Running variance of the discounted return, used to rescale training
// rewards before GAE.
class RewardScaler {
 public:
  explicit RewardScaler(double gamma) : gamma_(gamma) {}

  // Updates the statistics with these episodes, then rescales their rewards.
  void apply(std::vector<Trajectory>& trajectories);
  double scale() const;

 private:
  double gamma_;
  double count_ = 1e-4;
  double mean_ = 0.0;
  double var_ = 1.0;
};

// The PPO backbone shared by every trainer.
struct PpoAgent {
  policy::GaussianPolicy policy;
  policy::ValueFunction value_fn;
  policy::PpoLearner learner;
  RewardScaler scaler;
  rollout::BatchOptions batch_options;
  bool scale_rewards = true;

  PpoAgent(int state_dim, int action_dim, int width, const policy::PpoConfig& ppo, double gamma, double lambda,
           bool normalize_advantages, bool scale_rewards, Rng& init_rng);

  // Trajectories must carry `rewards`.
  policy::PpoStats update(std::vector<Trajectory>& trajectories, Rng& rng);
};

struct RunSeeds {
  std::uint64_t init;
  std::uint64_t collect;
  std::uint64_t update;
  std::uint64_t sample;
};
RunSeeds run_seeds(std::uint64_t seed);

// Normalizer fitted on the demo states plus config.norm_random_episodes
// random-action episodes in the imitator env.
StateNormalizer fit_input_normalizer(const TrainConfig& config, const Eigen::MatrixXd& demo_states);

Eigen::MatrixXd concat_states(const std::vector<Trajectory>& trajectories);
adversary::PairBatch concat_pairs(const std::vector<Trajectory>& trajectories);
Eigen::MatrixXd subsample_columns(const Eigen::MatrixXd& m, int max_cols, std::uint64_t seed);

// Writes failure.txt into the run directory (if any) before rethrowing.
void record_failure(const TrainConfig& config, int iteration, const std::string& what);

void ensure_dir(const std::filesystem::path& dir);

}  // namespace i2l::trainers::detail
