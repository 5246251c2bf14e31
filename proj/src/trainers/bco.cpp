#include <algorithm>
#include <limits>
#include <numeric>

#include "i2l/errors.hpp"
#include "internal.hpp"

namespace i2l::trainers {

namespace bco {

InverseModel InverseModel::create(StateNormalizer state_norm, StateNormalizer delta_norm, int action_dim, Rng& rng,
                                  double learning_rate, int width) {
  if (state_norm.dim() != delta_norm.dim()) throw ContractError("inverse model: normalizer dims differ");
  const int in = static_cast<int>(2 * state_norm.dim());
  InverseModel m{nn::Network::standard(in, action_dim, rng, width), std::move(state_norm), std::move(delta_norm), {}};
  m.optimizer = nn::Optimizer::adam(learning_rate, m.net.parameter_count());
  return m;
}

Eigen::MatrixXd InverseModel::inputs(const Eigen::MatrixXd& states, const Eigen::MatrixXd& next_states) const {
  if (states.cols() != next_states.cols()) throw ContractError("inverse model: pair count mismatch");
  Eigen::MatrixXd x(2 * states.rows(), states.cols());
  x.topRows(states.rows()) = state_norm.apply(states);
  x.bottomRows(states.rows()) = delta_norm.apply(next_states - states);
  return x;
}

Eigen::MatrixXd InverseModel::predict(const Eigen::MatrixXd& states, const Eigen::MatrixXd& next_states) const {
  return net.forward_batch(inputs(states, next_states));
}

nn::Evaluated mse_loss(const nn::Network& net, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets) {
  if (inputs.cols() != targets.cols() || inputs.cols() == 0) throw ContractError("mse: bad batch");
  const double inv_n = 1.0 / static_cast<double>(inputs.cols());
  return nn::gradients(net, inputs, [&](const Eigen::MatrixXd& out) {
    const Eigen::MatrixXd diff = out - targets;
    return nn::LossAndOutputGrad{0.5 * diff.squaredNorm() * inv_n, diff * inv_n};
  });
}

std::pair<double, double> fit_mse(nn::Network& net, nn::Optimizer& opt, const Eigen::MatrixXd& inputs,
                                  const Eigen::MatrixXd& targets, int steps, Rng& rng) {
  const double before = mse_loss(net, inputs, targets).loss;
  const Eigen::Index n = inputs.cols();
  const Eigen::Index b = std::min<Eigen::Index>(kMinibatch, n);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Eigen::Index at = n;
  Eigen::MatrixXd xb(inputs.rows(), b), yb(targets.rows(), b);
  for (int s = 0; s < steps; ++s) {
    if (at + b > n) {
      std::shuffle(order.begin(), order.end(), rng);
      at = 0;
    }
    for (Eigen::Index k = 0; k < b; ++k) {
      xb.col(k) = inputs.col(order[static_cast<std::size_t>(at + k)]);
      yb.col(k) = targets.col(order[static_cast<std::size_t>(at + k)]);
    }
    at += b;
    opt.step(net, mse_loss(net, xb, yb).grads);
  }
  return {before, mse_loss(net, inputs, targets).loss};
}

}  // namespace bco

TrainResult bco_train(const TrainConfig& config) {
  if (config.algorithm != Algorithm::bco) throw ContractError("bco_train: algorithm must be bco");
  config.validate();
  if (config.bco_rounds <= 0) throw ContractError("bco: rounds must be > 0");
  const rollout::Demo demo = rollout::load_demo(config.demo_path);
  const auto& env = config.env;
  if (demo.size() == 0) throw PreconditionError("bco: empty demo");
  if (demo.states.rows() != env.state_dim) throw PreconditionError("bco: demo state dim does not match env");
  const adversary::DiscInput demo_pairs = transition_pairs(demo.states, env.episode_length);
  if (demo_pairs.size() == 0) throw PreconditionError("bco: demo has no transitions");

  const auto seeds = detail::run_seeds(config.seed);
  Rng init(seeds.init);
  Rng fit_rng(seeds.update);
  auto pol = policy::GaussianPolicy::create(env.state_dim, env.action_dim, init, config.hidden_width);
  pol.set_log_std(Eigen::VectorXd::Constant(env.action_dim, bco::kBcLogStd));
  nn::Optimizer bc_opt = nn::Optimizer::adam(config.bco_lr, pol.mean_net().parameter_count());
  const auto evals = eval_seeds(config.seed, config.eval_episodes);

  // Env budget split evenly over the rounds, whole episodes only.
  const int episodes_per_round =
      static_cast<int>(config.total_steps / config.bco_rounds / env.episode_length);

  std::optional<bco::InverseModel> model;
  Eigen::MatrixXd seen_s, seen_next, seen_a;
  TrainResult result;
  long steps = 0;
  if (!config.run_dir.empty()) detail::ensure_dir(config.run_dir);
  for (int round = 1; episodes_per_round > 0 && round <= config.bco_rounds; ++round) {
    const auto round_seed = derive_seed(seeds.collect, static_cast<std::uint64_t>(round));
    try {
      // Round 1 explores with uniform random actions, later rounds with the
      // cloned policy.
      std::vector<Trajectory> trajs;
      for (int e = 0; e < episodes_per_round; ++e) {
        const auto s = derive_seed(round_seed, static_cast<std::uint64_t>(e));
        trajs.push_back(round == 1 ? rollout::random_episode(env, config.dynamics, s)
                                   : rollout::run_episode(pol, env, config.dynamics, s, false));
      }
      Eigen::Index n = 0;
      for (const auto& tr : trajs) n += tr.length();
      steps += n;
      Eigen::MatrixXd s(env.state_dim, n), next(env.state_dim, n), a(env.action_dim, n);
      Eigen::Index at = 0;
      for (const auto& tr : trajs) {
        const Eigen::Index T = tr.length();
        s.middleCols(at, T) = tr.states;
        if (T > 1) next.middleCols(at, T - 1) = tr.states.rightCols(T - 1);
        next.col(at + T - 1) = *tr.final_state;
        a.middleCols(at, T) = tr.actions->cwiseMax(-1.0).cwiseMin(1.0);
        at += T;
      }
      auto append = [](Eigen::MatrixXd& dst, const Eigen::MatrixXd& src) {
        Eigen::MatrixXd out(src.rows(), dst.cols() + src.cols());
        out << dst, src;
        dst = std::move(out);
      };
      if (seen_s.size() == 0) {
        seen_s = s;
        seen_next = next;
        seen_a = a;
      } else {
        append(seen_s, s);
        append(seen_next, next);
        append(seen_a, a);
      }
      if (!model)
        model = bco::InverseModel::create(StateNormalizer::fit(demo.states), StateNormalizer::fit(next - s),
                                          env.action_dim, init, config.bco_lr, config.hidden_width);

      const auto [model_before, model_after] = bco::fit_mse(model->net, model->optimizer,
                                                             model->inputs(seen_s, seen_next), seen_a,
                                                             config.bco_model_steps, fit_rng);
      (void)model_before;
      const Eigen::MatrixXd inferred =
          model->predict(demo_pairs.states, *demo_pairs.next_states).cwiseMax(-1.0).cwiseMin(1.0);
      const auto bc = bco::fit_mse(pol.mean_net(), bc_opt, demo_pairs.states, inferred, config.bco_bc_steps, fit_rng);

      IterationMetrics m;
      m.iter = round;
      m.steps = steps;
      m.mean_return = rollout::evaluate(pol, env, config.dynamics, evals);
      m.w1 = m.buffer_score = std::numeric_limits<double>::quiet_NaN();
      // Inverse-model and BC regression losses stand in for the adversary columns.
      m.disc_loss = model_after;
      m.critic_obj = bc.second;
      m.entropy = pol.entropy();
      result.metrics.push_back(m);
    } catch (const NumericError& e) {
      detail::record_failure(config, round, e.what());
      throw;
    }
  }

  result.policy = pol;
  result.final_return = result.metrics.empty() ? 0.0 : result.metrics.back().mean_return;
  if (!config.run_dir.empty()) {
    write_metrics_csv(config.run_dir / "metrics.csv", result.metrics);
    policy::save_policy(pol, config.run_dir / "policy.ckpt");
    if (model) nn::save_network(model->net, config.run_dir / "inverse.ckpt");
  }
  return result;
}

}  // namespace i2l::trainers
