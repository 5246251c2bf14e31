#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "i2l/adversary.hpp"
#include "i2l/buffer.hpp"
#include "i2l/envs.hpp"
#include "i2l/policy.hpp"
#include "i2l/rollout.hpp"
#include "i2l/wcritic.hpp"

namespace i2l::trainers {

enum class Algorithm { i2l, gail_s, gaifo, gail_sa, airl, bco };

std::string to_string(Algorithm algo);
// Throws ContractError listing the valid names.
Algorithm parse_algorithm(const std::string& name);
// gail_sa and airl read demo actions; everything else is state-only.
bool needs_demo_actions(Algorithm algo);

// i2l trains its discriminator against a small, slowly changing buffer and
// needs a stronger discriminator and faster policy than the baselines.
inline constexpr int kI2lDiscSteps = 50;
inline constexpr double kI2lDiscLearningRate = 1e-3;
inline constexpr double kI2lPpoLearningRate = 3e-4;

struct TrainConfig {
  // Defaults with the per-algorithm discriminator and PPO settings applied.
  static TrainConfig for_algorithm(Algorithm algo);

  Algorithm algorithm = Algorithm::i2l;
  envs::EnvSpec env = envs::EnvSpec::make(envs::EnvKind::pendulum);
  envs::DynamicsConfig dynamics;
  std::filesystem::path demo_path;
  long total_steps = 300000;
  std::uint64_t seed = 0;
  std::size_t buffer_capacity = 5;

  int steps_per_iter = 2000;
  int hidden_width = 64;
  policy::PpoConfig ppo;  // learning_rate 1e-4; see for_algorithm
  double gamma = 0.99;
  double lambda = 0.95;
  bool normalize_advantages = true;
  // Divide training rewards by a running std of discounted returns.
  bool scale_rewards = true;

  int disc_steps = adversary::kDiscSteps;
  double disc_lr = adversary::kDiscLearningRate;
  int critic_steps = wcritic::kCriticSteps;
  double critic_lr = wcritic::kCriticLearningRate;
  double clip_bound = wcritic::kClipBound;
  int critic_buffer_max = 2000;
  // Random-action episodes in the imitator env pooled with the demo when
  // fitting the input normalizer; 0 fits on the demo alone.
  int norm_random_episodes = 10;
  // Weight on the -log pi part of the AIRL reward fed to PPO.
  double log_pi_weight = 1.0;

  int eval_episodes = 10;
  // Buffer snapshots for the lower-bound measurement; 0 disables.
  int snapshot_every = 10;

  // BCO(alpha)
  int bco_rounds = 5;
  int bco_model_steps = 3000;
  int bco_bc_steps = 3000;
  double bco_lr = 1e-3;

  // Artifacts go here when non-empty.
  std::filesystem::path run_dir;

  void validate() const;
  int iterations() const { return static_cast<int>(total_steps / steps_per_iter); }
};

struct IterationMetrics {
  int iter = 0;
  long steps = 0;
  double mean_return = 0.0;
  double w1 = 0.0;
  double buffer_score = 0.0;
  double disc_loss = 0.0;
  double critic_obj = 0.0;
  double entropy = 0.0;
};

inline constexpr std::string_view kMetricsHeader = "iter,steps,mean_return,w1,buffer_score,disc_loss,critic_obj,entropy";
std::string format_metrics_row(const IterationMetrics& m);
void write_metrics_csv(const std::filesystem::path& path, const std::vector<IterationMetrics>& rows);
std::vector<IterationMetrics> read_metrics_csv(const std::filesystem::path& path);

// Receives the name of each Algorithm 1 step as it runs.
using EventHook = std::function<void(std::string_view)>;

struct TrainResult {
  policy::GaussianPolicy policy;
  std::vector<IterationMetrics> metrics;
  double final_return = 0.0;  // last evaluation; 0 when no iteration ran
};

TrainResult i2l_train(const TrainConfig& config, const EventHook& on_event = {});
// gail_s, gaifo, gail_sa, airl
TrainResult baseline_train(const TrainConfig& config);
TrainResult bco_train(const TrainConfig& config);
// Dispatches on config.algorithm.
TrainResult train(const TrainConfig& config);

struct ExpertConfig {
  envs::EnvSpec env = envs::EnvSpec::make(envs::EnvKind::pendulum);
  envs::DynamicsConfig dynamics;
  long steps = 300000;
  std::uint64_t seed = 0;
  int steps_per_iter = 2000;
  int hidden_width = 64;
  policy::PpoConfig ppo{.learning_rate = 3e-4};
  double gamma = 0.99;
  double lambda = 0.95;
  bool scale_rewards = true;
  int demo_states = 1000;
  int candidate_episodes = 20;
  int eval_episodes = 10;
};

struct ExpertResult {
  policy::GaussianPolicy policy;
  rollout::Demo demo;     // state-only
  rollout::Demo demo_sa;  // same states with the expert's actions
  double eval_return = 0.0;
  std::vector<IterationMetrics> metrics;
};

// PPO on true rewards; the demo is the states of the best deterministic
// episodes, concatenated and cut to exactly demo_states.
ExpertResult train_expert(const ExpertConfig& config);

// Deterministic evaluation seeds for a run.
std::vector<std::uint64_t> eval_seeds(std::uint64_t seed, int count);
// Mean return of uniform random actions on the given reset seeds.
double random_policy_return(const envs::EnvSpec& spec, const envs::DynamicsConfig& dynamics,
                            const std::vector<std::uint64_t>& seeds);
// (value - floor) / (reference - floor): 1 at the reference, 0 at the floor.
double normalized_score(double value, double floor, double reference);

// Consecutive (s, s') pairs that do not cross episode boundaries.
adversary::DiscInput transition_pairs(const Eigen::MatrixXd& states, int episode_length);

// ---- BCO(alpha) pieces --------------------------------------------------

namespace bco {

// Fixed exploration/BC noise of the cloned policy.
inline constexpr double kBcLogStd = -1.0;
inline constexpr int kMinibatch = 256;

// p(a | s, s') as a regression net on [norm(s), norm(s' - s)].
struct InverseModel {
  nn::Network net;
  StateNormalizer state_norm;
  StateNormalizer delta_norm;
  nn::Optimizer optimizer;

  static InverseModel create(StateNormalizer state_norm, StateNormalizer delta_norm, int action_dim, Rng& rng,
                             double learning_rate, int width = 64);
  Eigen::MatrixXd inputs(const Eigen::MatrixXd& states, const Eigen::MatrixXd& next_states) const;
  Eigen::MatrixXd predict(const Eigen::MatrixXd& states, const Eigen::MatrixXd& next_states) const;
};

// mean over columns of 0.5 * ||net(x) - y||^2 and its gradient.
nn::Evaluated mse_loss(const nn::Network& net, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets);

// `steps` Adam minibatch steps on the MSE; returns the full-data loss
// before and after.
std::pair<double, double> fit_mse(nn::Network& net, nn::Optimizer& opt, const Eigen::MatrixXd& inputs,
                                  const Eigen::MatrixXd& targets, int steps, Rng& rng);

}  // namespace bco

// ---- measurements -------------------------------------------------------

inline constexpr std::array<double, 3> kLipschitzValues{0.5, 1.0, 1.5};
inline constexpr int kMeasureCriticSteps = 500;

struct GapRow {
  int iter = 0;
  double lhs = 0.0;  // E_oracle[f]
  double buffer_f = 0.0;
  double w1 = 0.0;  // state-action critic estimate
  std::array<double, kLipschitzValues.size()> rhs{};

  double gap(std::size_t l_index) const { return lhs - rhs[l_index]; }
};

struct GapInputs {
  // (iteration, buffer) in iteration order.
  std::vector<std::pair<int, buffer::PriorityBuffer>> snapshots;
  adversary::AirlDiscriminator f;  // fixed snapshot
  adversary::PairBatch oracle_pairs;
  int critic_steps = kMeasureCriticSteps;
  double clip_bound = wcritic::kClipBound;
  double critic_lr = wcritic::kCriticLearningRate;
  std::uint64_t seed = 0;
};

// Per snapshot: LHS = E_oracle[f], RHS(L) = E_buffer[f] - L * W1_hat, where
// W1_hat comes from a fresh critic trained on (s ⊕ a) tuples.
std::vector<GapRow> measure_lower_bound_gap(const GapInputs& inputs);

struct W1Trend {
  double initial_mean = 0.0;
  double final_mean = 0.0;
  bool decreased = false;
};

// Needs at least 2 * window iterations.
W1Trend measure_w1_trend(const std::vector<IterationMetrics>& metrics, int window = 10);

// ---- checkpoints --------------------------------------------------------

void save_airl(const adversary::AirlDiscriminator& disc, const std::filesystem::path& path);
adversary::AirlDiscriminator load_airl(const std::filesystem::path& path);
void save_critic(const wcritic::WassersteinCritic& critic, const std::filesystem::path& path);
wcritic::WassersteinCritic load_critic(const std::filesystem::path& path);

// Snapshot files of a run directory, sorted by iteration.
std::vector<std::pair<int, std::filesystem::path>> list_snapshots(const std::filesystem::path& run_dir);

}  // namespace i2l::trainers
