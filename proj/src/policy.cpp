#include "i2l/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

#include "i2l/errors.hpp"
#include "i2l/rollout.hpp"

namespace i2l::policy {

namespace {

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

Eigen::MatrixXd select_cols(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& idx) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = m.col(idx[i]);
  return out;
}

}  // namespace

GaussianPolicy::GaussianPolicy(nn::Network mean_net, Eigen::VectorXd log_std) : mean_net_(std::move(mean_net)) {
  if (log_std.size() != mean_net_.output_dim()) throw ContractError("log_std size != action dim");
  set_log_std(log_std);
}

GaussianPolicy GaussianPolicy::create(int state_dim, int action_dim, Rng& rng, int width) {
  return {nn::Network::standard(state_dim, action_dim, rng, width), Eigen::VectorXd::Zero(action_dim)};
}

void GaussianPolicy::set_log_std(const Eigen::VectorXd& log_std) {
  log_std_ = log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
}

Eigen::VectorXd gaussian_log_density(const Eigen::MatrixXd& means, const Eigen::VectorXd& log_std,
                                     const Eigen::MatrixXd& actions) {
  if (means.rows() != log_std.size() || actions.rows() != means.rows() || actions.cols() != means.cols())
    throw ContractError("gaussian_log_density: shape mismatch");
  const Eigen::ArrayXd inv_std = (-log_std.array()).exp();
  const Eigen::ArrayXXd z = (actions - means).array().colwise() * inv_std;
  const double norm = log_std.sum() + static_cast<double>(log_std.size()) * kHalfLog2Pi;
  return (-0.5 * z.square().colwise().sum() - norm).transpose().matrix();
}

double GaussianPolicy::log_prob(const Eigen::VectorXd& state, const Eigen::VectorXd& action) const {
  return log_prob_batch(Eigen::MatrixXd(state), Eigen::MatrixXd(action))[0];
}

Eigen::VectorXd GaussianPolicy::log_prob_batch(const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions) const {
  if (states.cols() != actions.cols()) throw ContractError("log_prob: batch size mismatch");
  return gaussian_log_density(mean_net_.forward_batch(states), log_std_, actions);
}

double GaussianPolicy::entropy() const {
  return log_std_.sum() + static_cast<double>(log_std_.size()) * (kHalfLog2Pi + 0.5);
}

std::size_t GaussianPolicy::parameter_count() const {
  return mean_net_.parameter_count() + static_cast<std::size_t>(log_std_.size());
}

Eigen::VectorXd GaussianPolicy::flat_parameters() const {
  Eigen::VectorXd net = mean_net_.flat_parameters();
  Eigen::VectorXd flat(net.size() + log_std_.size());
  flat << net, log_std_;
  return flat;
}

void GaussianPolicy::set_flat_parameters(const Eigen::VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != parameter_count())
    throw ContractError("policy set_flat_parameters: size mismatch");
  const auto n = static_cast<Eigen::Index>(mean_net_.parameter_count());
  mean_net_.set_flat_parameters(flat.head(n));
  set_log_std(flat.tail(log_std_.size()));
}

void GaussianPolicy::save(std::ostream& out) const {
  mean_net_.save(out);
  out << "log_std " << log_std_.size() << '\n' << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index i = 0; i < log_std_.size(); ++i) out << (i ? " " : "") << log_std_[i];
  out << '\n';
}

GaussianPolicy GaussianPolicy::load(std::istream& in) {
  nn::Network net = nn::Network::load(in);
  std::string tag;
  Eigen::Index n = 0;
  if (!(in >> tag >> n) || tag != "log_std" || n != net.output_dim())
    throw ContractError("policy checkpoint: missing log_std block");
  Eigen::VectorXd log_std(n);
  for (auto& v : log_std)
    if (!(in >> v)) throw ContractError("policy checkpoint: truncated log_std");
  return {std::move(net), log_std};
}

LogProbGradients log_prob_gradients(const GaussianPolicy& policy, const Eigen::MatrixXd& states,
                                    const Eigen::MatrixXd& actions, const Eigen::VectorXd& weights) {
  if (states.cols() != actions.cols() || weights.size() != states.cols())
    throw ContractError("log_prob_gradients: batch size mismatch");
  nn::ForwardCache cache;
  const Eigen::MatrixXd mu = policy.mean_net().forward_batch(states, cache);
  const Eigen::ArrayXd inv_std = (-policy.log_std().array()).exp();
  const Eigen::ArrayXXd z = (actions - mu).array().colwise() * inv_std;
  // dlogp/dmu = z / std; dlogp/dlog_std = z^2 - 1
  const Eigen::MatrixXd dmu = ((z.colwise() * inv_std).rowwise() * weights.transpose().array()).matrix();
  LogProbGradients out;
  out.log_std_grad = ((z.square() - 1.0).rowwise() * weights.transpose().array()).rowwise().sum().matrix();
  out.mean_grads = policy.mean_net().backward(cache, dmu);
  return out;
}

ActionSample sample(const GaussianPolicy& policy, const Eigen::VectorXd& state, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::VectorXd mu = policy.mean(state);
  Eigen::VectorXd xi(mu.size());
  for (auto& x : xi) x = normal(rng);
  ActionSample s;
  s.action = mu + policy.std_dev().cwiseProduct(xi);
  s.log_prob = gaussian_log_density(Eigen::MatrixXd(mu), policy.log_std(), Eigen::MatrixXd(s.action))[0];
  return s;
}

ActionSample sample(const GaussianPolicy& policy, const Eigen::VectorXd& state, std::uint64_t seed) {
  Rng rng(seed);
  return sample(policy, state, rng);
}

ValueFunction ValueFunction::create(int state_dim, Rng& rng, int width) {
  return {nn::Network::standard(state_dim, 1, rng, width)};
}

PpoLoss ppo_loss(const GaussianPolicy& policy, const ValueFunction& value_fn, const RolloutBatch& batch,
                 const PpoConfig& config, const std::vector<Eigen::Index>& indices) {
  std::vector<Eigen::Index> idx = indices;
  if (idx.empty()) {
    idx.resize(static_cast<std::size_t>(batch.size()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  }
  const auto B = static_cast<Eigen::Index>(idx.size());
  if (B == 0) throw ContractError("ppo_loss: empty batch");
  const double inv_b = 1.0 / static_cast<double>(B);

  const Eigen::MatrixXd states = select_cols(batch.states, idx);
  const Eigen::MatrixXd actions = select_cols(batch.actions, idx);

  const Eigen::VectorXd logp = policy.log_prob_batch(states, actions);

  PpoLoss out;
  Eigen::VectorXd weights(B);
  int clipped = 0;
  for (Eigen::Index i = 0; i < B; ++i) {
    const Eigen::Index k = idx[static_cast<std::size_t>(i)];
    const double adv = batch.advantages[k];
    const double ratio = std::exp(logp[i] - batch.log_probs[k]);
    const double clipped_ratio = std::clamp(ratio, 1.0 - config.clip_eps, 1.0 + config.clip_eps);
    const double unclipped_term = ratio * adv;
    const double clipped_term = clipped_ratio * adv;
    double coef = 0.0;  // d surrogate_i / d logp_i
    if (unclipped_term <= clipped_term) {
      out.surrogate += unclipped_term;
      coef = unclipped_term;
    } else {
      out.surrogate += clipped_term;
    }
    if (clipped_ratio != ratio) ++clipped;
    weights[i] = -coef * inv_b;  // loss = -mean(surrogate)
  }
  out.surrogate *= inv_b;
  out.clip_fraction = clipped * inv_b;
  out.entropy = policy.entropy();
  auto lg = log_prob_gradients(policy, states, actions, weights);
  out.mean_grads = std::move(lg.mean_grads);
  out.log_std_grad = lg.log_std_grad.array() - config.entropy_coef;

  nn::ForwardCache vcache;
  const Eigen::MatrixXd v = value_fn.net.forward_batch(states, vcache);
  Eigen::MatrixXd dv(1, B);
  for (Eigen::Index i = 0; i < B; ++i) {
    const double err = v(0, i) - batch.returns[idx[static_cast<std::size_t>(i)]];
    out.value_loss += err * err;
    dv(0, i) = 2.0 * config.value_coef * err * inv_b;
  }
  out.value_loss *= inv_b;
  out.value_grads = value_fn.net.backward(vcache, dv);

  out.loss = -out.surrogate + config.value_coef * out.value_loss;
  if (config.entropy_coef != 0.0) out.loss -= config.entropy_coef * out.entropy;
  return out;
}

PpoLearner::PpoLearner(const GaussianPolicy& policy, const ValueFunction& value_fn, PpoConfig config)
    : config_(config),
      policy_opt_(nn::Optimizer::adam(config.learning_rate, policy.parameter_count())),
      value_opt_(nn::Optimizer::adam(config.learning_rate, value_fn.net.parameter_count())) {
  if (config.epochs <= 0 || config.minibatch_size <= 0) throw ContractError("ppo: epochs and minibatch must be > 0");
}

PpoStats PpoLearner::update(GaussianPolicy& policy, ValueFunction& value_fn, const RolloutBatch& batch, Rng& rng) {
  const Eigen::Index n = batch.size();
  if (n == 0) throw ContractError("ppo_update: empty batch");
  if (batch.log_probs.size() != n || batch.advantages.size() != n || batch.returns.size() != n)
    throw ContractError("ppo_update: batch not prepared (log-probs/advantages missing)");

  const GaussianPolicy policy_at_entry = policy;
  const ValueFunction value_at_entry = value_fn;
  const nn::Optimizer popt_at_entry = policy_opt_;
  const nn::Optimizer vopt_at_entry = value_opt_;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  PpoStats stats;
  try {
    for (int epoch = 0; epoch < config_.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config_.minibatch_size)) {
        const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config_.minibatch_size));
        std::vector<Eigen::Index> mb(order.begin() + static_cast<std::ptrdiff_t>(start),
                                     order.begin() + static_cast<std::ptrdiff_t>(end));
        PpoLoss l = ppo_loss(policy, value_fn, batch, config_, mb);
        if (!std::isfinite(l.loss)) throw NumericError("ppo_update: non-finite loss", l.loss);

        Eigen::VectorXd pgrad(static_cast<Eigen::Index>(policy.parameter_count()));
        pgrad << l.mean_grads.flatten(), l.log_std_grad;
        Eigen::VectorXd vgrad = l.value_grads.flatten();
        if (config_.max_grad_norm > 0.0) {
          const double norm = std::sqrt(pgrad.squaredNorm() + vgrad.squaredNorm());
          if (norm > config_.max_grad_norm) {
            const double s = config_.max_grad_norm / (norm + 1e-12);
            pgrad *= s;
            vgrad *= s;
          }
        }
        Eigen::VectorXd pflat = policy.flat_parameters();
        policy_opt_.step(pflat, pgrad);
        policy.set_flat_parameters(pflat);
        Eigen::VectorXd vflat = value_fn.net.flat_parameters();
        value_opt_.step(vflat, vgrad);
        value_fn.net.set_flat_parameters(vflat);

        stats.surrogate += l.surrogate;
        stats.value_loss += l.value_loss;
        stats.clip_fraction += l.clip_fraction;
        ++stats.gradient_steps;
      }
    }
    if (!policy.mean_net().all_finite() || !value_fn.net.all_finite())
      throw NumericError("ppo_update: parameters became non-finite", std::nan(""));
  } catch (const NumericError&) {
    policy = policy_at_entry;
    value_fn = value_at_entry;
    policy_opt_ = popt_at_entry;
    value_opt_ = vopt_at_entry;
    throw;
  }
  if (stats.gradient_steps > 0) {
    const double k = 1.0 / stats.gradient_steps;
    stats.surrogate *= k;
    stats.value_loss *= k;
    stats.clip_fraction *= k;
  }
  stats.entropy = policy.entropy();
  return stats;
}

void save_policy(const GaussianPolicy& policy, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ContractError("cannot write " + path.string());
  policy.save(out);
}

GaussianPolicy load_policy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot read policy " + path.string());
  return GaussianPolicy::load(in);
}

}  // namespace i2l::policy
