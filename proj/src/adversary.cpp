#include "i2l/adversary.hpp"

#include <cmath>

#include "i2l/errors.hpp"

namespace i2l::adversary {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

Eigen::MatrixXd stack(const Eigen::MatrixXd& top, const Eigen::MatrixXd& bottom) {
  if (top.cols() != bottom.cols()) throw ContractError("discriminator input: batch size mismatch");
  Eigen::MatrixXd out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

// Loss contribution of each sample given its logit z: label 1 -> softplus(-z),
// label 0 -> softplus(z); derivative is sigmoid(z) - label.
struct LogitLoss {
  double loss = 0.0;
  Eigen::MatrixXd grad;
};

LogitLoss logit_bce(const Eigen::VectorXd& logits, double label) {
  const auto n = logits.size();
  LogitLoss out{0.0, Eigen::MatrixXd(1, n)};
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double z = logits[i];
    out.loss += label > 0.5 ? softplus(-z) : softplus(z);
    out.grad(0, i) = (sigmoid(z) - label) * inv_n;
  }
  out.loss *= inv_n;
  return out;
}

}  // namespace

AirlDiscriminator AirlDiscriminator::create(int state_dim, int action_dim, StateNormalizer normalizer, Rng& rng,
                                            double learning_rate, int width) {
  if (normalizer.dim() != state_dim) throw ContractError("airl: normalizer dim != state dim");
  AirlDiscriminator d{nn::Network::standard(state_dim + action_dim, 1, rng, width), std::move(normalizer), {}};
  d.optimizer = nn::Optimizer::adam(learning_rate, d.f.parameter_count());
  return d;
}

Eigen::MatrixXd AirlDiscriminator::inputs(const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions) const {
  return stack(normalizer.apply(states), actions);
}

Eigen::VectorXd AirlDiscriminator::f_values(const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions) const {
  return f.forward_batch(inputs(states, actions)).row(0).transpose();
}

double AirlDiscriminator::f_value(const Eigen::VectorXd& state, const Eigen::VectorXd& action) const {
  return f_values(Eigen::MatrixXd(state), Eigen::MatrixXd(action))[0];
}

double airl_d(const AirlDiscriminator& disc, const Eigen::VectorXd& state, const Eigen::VectorXd& action,
              double log_pi) {
  return sigmoid(disc.f_value(state, action) - log_pi);
}

double imitation_reward(const AirlDiscriminator& disc, const Eigen::VectorXd& state, const Eigen::VectorXd& action,
                        double log_pi) {
  return disc.f_value(state, action) - log_pi;
}

Eigen::VectorXd imitation_rewards(const AirlDiscriminator& disc, const Eigen::MatrixXd& states,
                                  const Eigen::MatrixXd& actions, const Eigen::VectorXd& log_pis) {
  if (log_pis.size() != states.cols()) throw ContractError("imitation_rewards: |log_pi| != batch size");
  return disc.f_values(states, actions) - log_pis;
}

DiscObjective airl_objective(const AirlDiscriminator& disc, const PairBatch& positives,
                             const Eigen::VectorXd& positive_log_pi, const PairBatch& negatives,
                             const Eigen::VectorXd& negative_log_pi) {
  if (positives.size() == 0 || negatives.size() == 0) throw PreconditionError("airl: empty batch");
  if (positive_log_pi.size() != positives.size() || negative_log_pi.size() != negatives.size())
    throw ContractError("airl: log_pi size mismatch");

  DiscObjective out;
  auto half = [&](const PairBatch& b, const Eigen::VectorXd& log_pi, double label) {
    nn::ForwardCache cache;
    const Eigen::MatrixXd f = disc.f.forward_batch(disc.inputs(b.states, b.actions), cache);
    const LogitLoss l = logit_bce(f.row(0).transpose() - log_pi, label);
    out.objective -= l.loss;
    return disc.f.backward(cache, l.grad);
  };
  out.grads = half(positives, positive_log_pi, 1.0);
  out.grads += half(negatives, negative_log_pi, 0.0);
  if (!std::isfinite(out.objective)) throw NumericError("airl: non-finite objective", out.objective);
  return out;
}

DiscUpdateResult airl_update(AirlDiscriminator& disc, const PairBatch& positives, const PairBatch& negatives,
                             const policy::GaussianPolicy& policy, int steps) {
  if (positives.size() == 0) throw PreconditionError("airl_update: empty buffer batch (bootstrap the buffer first)");
  if (negatives.size() == 0) throw PreconditionError("airl_update: empty policy batch");
  const Eigen::VectorXd pos_lp = policy.log_prob_batch(positives.states, positives.actions);
  const Eigen::VectorXd neg_lp = policy.log_prob_batch(negatives.states, negatives.actions);
  DiscUpdateResult r;
  for (int k = 0; k < steps; ++k) {
    DiscObjective o = airl_objective(disc, positives, pos_lp, negatives, neg_lp);
    if (k == 0) r.loss_before = -o.objective;
    disc.optimizer.step(disc.f, o.grads);
  }
  r.loss_after = -airl_objective(disc, positives, pos_lp, negatives, neg_lp).objective;
  if (steps == 0) r.loss_before = r.loss_after;
  return r;
}

std::string to_string(DiscMode mode) {
  switch (mode) {
    case DiscMode::gail_s: return "gail_s";
    case DiscMode::gaifo: return "gaifo";
    case DiscMode::gail_sa: return "gail_sa";
  }
  return "?";
}

StateDiscriminator StateDiscriminator::create(DiscMode mode, int state_dim, int action_dim,
                                              StateNormalizer normalizer, Rng& rng, double learning_rate,
                                              int width) {
  if (normalizer.dim() != state_dim) throw ContractError("state disc: normalizer dim != state dim");
  int in = state_dim;
  if (mode == DiscMode::gaifo) in = 2 * state_dim;
  if (mode == DiscMode::gail_sa) in = state_dim + action_dim;
  StateDiscriminator d;
  d.net = nn::Network::standard(in, 1, rng, width);
  d.normalizer = std::move(normalizer);
  d.optimizer = nn::Optimizer::adam(learning_rate, d.net.parameter_count());
  d.mode = mode;
  d.state_dim = state_dim;
  d.action_dim = action_dim;
  return d;
}

Eigen::MatrixXd StateDiscriminator::inputs(const DiscInput& batch) const {
  if (batch.states.rows() != state_dim) throw ContractError("state disc: state dim mismatch");
  switch (mode) {
    case DiscMode::gail_s:
      return normalizer.apply(batch.states);
    case DiscMode::gaifo:
      if (!batch.next_states || batch.next_states->rows() != state_dim)
        throw ContractError("gaifo discriminator needs (s, s') pairs");
      return stack(normalizer.apply(batch.states), normalizer.apply(*batch.next_states));
    case DiscMode::gail_sa:
      if (!batch.actions || batch.actions->rows() != action_dim)
        throw ContractError("gail_sa discriminator needs (s, a) pairs");
      return stack(normalizer.apply(batch.states), *batch.actions);
  }
  throw ContractError("state disc: unknown mode");
}

Eigen::VectorXd StateDiscriminator::logits(const DiscInput& batch) const {
  return net.forward_batch(inputs(batch)).row(0).transpose();
}

Eigen::VectorXd StateDiscriminator::probabilities(const DiscInput& batch) const {
  return logits(batch).unaryExpr([](double z) { return sigmoid(z); });
}

Eigen::VectorXd StateDiscriminator::rewards(const DiscInput& batch) const {
  return logits(batch).unaryExpr([](double z) { return softplus(z); });
}

BceLoss state_disc_loss(const StateDiscriminator& disc, const DiscInput& expert, const DiscInput& policy_batch) {
  if (expert.size() == 0 || policy_batch.size() == 0) throw PreconditionError("state disc: empty batch");
  BceLoss out;
  auto half = [&](const DiscInput& b, double label) {
    nn::ForwardCache cache;
    const Eigen::MatrixXd z = disc.net.forward_batch(disc.inputs(b), cache);
    const LogitLoss l = logit_bce(z.row(0).transpose(), label);
    out.loss += l.loss;
    return disc.net.backward(cache, l.grad);
  };
  out.grads = half(expert, 1.0);
  out.grads += half(policy_batch, 0.0);
  if (!std::isfinite(out.loss)) throw NumericError("state disc: non-finite loss", out.loss);
  return out;
}

DiscUpdateResult state_disc_update(StateDiscriminator& disc, const DiscInput& expert, const DiscInput& policy_batch,
                                   int steps) {
  DiscUpdateResult r;
  for (int k = 0; k < steps; ++k) {
    BceLoss l = state_disc_loss(disc, expert, policy_batch);
    if (k == 0) r.loss_before = l.loss;
    disc.optimizer.step(disc.net, l.grads);
  }
  r.loss_after = state_disc_loss(disc, expert, policy_batch).loss;
  if (steps == 0) r.loss_before = r.loss_after;
  return r;
}

}  // namespace i2l::adversary
