#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>

#include "i2l/nn.hpp"
#include "i2l/normalizer.hpp"
#include "i2l/policy.hpp"
#include "i2l/rng.hpp"

// Discriminators: the AIRL-structured reward learner used by I2L (and the
// AIRL baseline), plus the plain GAIL-family discriminators.
namespace i2l::adversary {

inline constexpr double kDiscLearningRate = 3e-4;
inline constexpr int kDiscSteps = 5;

double softplus(double x);
double sigmoid(double x);

// Batch of (s, a) pairs, column-aligned.
struct PairBatch {
  Eigen::MatrixXd states;
  Eigen::MatrixXd actions;

  Eigen::Index size() const { return states.cols(); }
};

// f_omega(s, a) with D = exp(f) / (exp(f) + pi(a|s)).
struct AirlDiscriminator {
  nn::Network f;
  StateNormalizer normalizer;
  nn::Optimizer optimizer;

  static AirlDiscriminator create(int state_dim, int action_dim, StateNormalizer normalizer, Rng& rng,
                                  double learning_rate = kDiscLearningRate, int width = 64);

  Eigen::MatrixXd inputs(const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions) const;
  Eigen::VectorXd f_values(const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions) const;
  double f_value(const Eigen::VectorXd& state, const Eigen::VectorXd& action) const;
};

// sigmoid(f - log_pi); never overflows.
double airl_d(const AirlDiscriminator& disc, const Eigen::VectorXd& state, const Eigen::VectorXd& action,
              double log_pi);

// log D - log(1 - D), evaluated through the identity f - log_pi.
double imitation_reward(const AirlDiscriminator& disc, const Eigen::VectorXd& state, const Eigen::VectorXd& action,
                        double log_pi);
Eigen::VectorXd imitation_rewards(const AirlDiscriminator& disc, const Eigen::MatrixXd& states,
                                  const Eigen::MatrixXd& actions, const Eigen::VectorXd& log_pis);

// objective = E_pos[log D] + E_neg[log(1 - D)]; grads are of the loss
// (-objective) with respect to f's parameters. log_pi values are constants.
struct DiscObjective {
  double objective = 0.0;
  nn::Gradients grads;
};
DiscObjective airl_objective(const AirlDiscriminator& disc, const PairBatch& positives,
                             const Eigen::VectorXd& positive_log_pi, const PairBatch& negatives,
                             const Eigen::VectorXd& negative_log_pi);

struct DiscUpdateResult {
  double loss_before = 0.0;  // -objective before the first step
  double loss_after = 0.0;
};

// `steps` Adam steps ascending the objective. Positives come from the priority
// buffer (or expert (s,a) for the AIRL baseline), negatives from fresh
// rollouts. log pi is taken from `policy` once and held fixed.
DiscUpdateResult airl_update(AirlDiscriminator& disc, const PairBatch& positives, const PairBatch& negatives,
                             const policy::GaussianPolicy& policy, int steps = kDiscSteps);

enum class DiscMode { gail_s, gaifo, gail_sa };
std::string to_string(DiscMode mode);

// Inputs per mode: gail_s -> states; gaifo -> states + next_states;
// gail_sa -> states + actions.
struct DiscInput {
  Eigen::MatrixXd states;
  std::optional<Eigen::MatrixXd> next_states;
  std::optional<Eigen::MatrixXd> actions;

  Eigen::Index size() const { return states.cols(); }
};

struct StateDiscriminator {
  nn::Network net;  // -> logit
  StateNormalizer normalizer;
  nn::Optimizer optimizer;
  DiscMode mode = DiscMode::gail_s;
  int state_dim = 0;
  int action_dim = 0;

  static StateDiscriminator create(DiscMode mode, int state_dim, int action_dim, StateNormalizer normalizer,
                                   Rng& rng, double learning_rate = kDiscLearningRate, int width = 64);

  // Throws ContractError if the batch does not carry what the mode needs.
  Eigen::MatrixXd inputs(const DiscInput& batch) const;
  Eigen::VectorXd logits(const DiscInput& batch) const;
  // D = sigmoid(logit)
  Eigen::VectorXd probabilities(const DiscInput& batch) const;
  // -log(1 - D) = softplus(logit)
  Eigen::VectorXd rewards(const DiscInput& batch) const;
};

// Binary cross-entropy with expert labelled 1: loss = E_exp[-log D] + E_pol[-log(1-D)].
struct BceLoss {
  double loss = 0.0;
  nn::Gradients grads;
};
BceLoss state_disc_loss(const StateDiscriminator& disc, const DiscInput& expert, const DiscInput& policy_batch);

DiscUpdateResult state_disc_update(StateDiscriminator& disc, const DiscInput& expert, const DiscInput& policy_batch,
                                   int steps = kDiscSteps);

}  // namespace i2l::adversary
