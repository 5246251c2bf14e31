#include <fstream>
#include <limits>

#include "i2l/errors.hpp"
#include "internal.hpp"

namespace i2l::trainers {

namespace {

adversary::DiscMode disc_mode(Algorithm algo) {
  switch (algo) {
    case Algorithm::gail_s: return adversary::DiscMode::gail_s;
    case Algorithm::gaifo: return adversary::DiscMode::gaifo;
    case Algorithm::gail_sa: return adversary::DiscMode::gail_sa;
    default: throw ContractError("no state discriminator for " + to_string(algo));
  }
}

// (s_t, s_{t+1}) for every step; the last step pairs with the state the
// episode ended in.
Eigen::MatrixXd next_states(const Trajectory& tr) {
  const Eigen::Index T = tr.length();
  Eigen::MatrixXd out(tr.states.rows(), T);
  if (T > 1) out.leftCols(T - 1) = tr.states.rightCols(T - 1);
  out.col(T - 1) = tr.final_state ? *tr.final_state : tr.states.col(T - 1);
  return out;
}

adversary::DiscInput policy_input(adversary::DiscMode mode, const Trajectory& tr) {
  adversary::DiscInput in{tr.states, std::nullopt, std::nullopt};
  if (mode == adversary::DiscMode::gaifo) in.next_states = next_states(tr);
  if (mode == adversary::DiscMode::gail_sa) in.actions = *tr.actions;
  return in;
}

adversary::DiscInput concat_inputs(const std::vector<adversary::DiscInput>& parts) {
  Eigen::Index n = 0;
  for (const auto& p : parts) n += p.size();
  const auto& first = parts.front();
  adversary::DiscInput out{Eigen::MatrixXd(first.states.rows(), n), std::nullopt, std::nullopt};
  if (first.next_states) out.next_states = Eigen::MatrixXd(first.states.rows(), n);
  if (first.actions) out.actions = Eigen::MatrixXd(first.actions->rows(), n);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.states.middleCols(at, p.size()) = p.states;
    if (out.next_states) out.next_states->middleCols(at, p.size()) = *p.next_states;
    if (out.actions) out.actions->middleCols(at, p.size()) = *p.actions;
    at += p.size();
  }
  return out;
}

}  // namespace

TrainResult baseline_train(const TrainConfig& config) {
  const Algorithm algo = config.algorithm;
  if (algo == Algorithm::i2l || algo == Algorithm::bco)
    throw ContractError("baseline_train: not a baseline: " + to_string(algo));
  config.validate();
  const rollout::Demo demo = rollout::load_demo(config.demo_path);
  const auto& env = config.env;
  if (demo.size() == 0) throw PreconditionError("baseline: empty demo");
  if (demo.states.rows() != env.state_dim) throw PreconditionError("baseline: demo state dim does not match env");
  if (needs_demo_actions(algo)) {
    if (!demo.actions)
      throw PreconditionError(to_string(algo) + " needs expert actions; pass the action-augmented demo (demo-sa)");
    if (demo.actions->rows() != env.action_dim) throw PreconditionError("baseline: demo action dim does not match env");
  }

  const auto seeds = detail::run_seeds(config.seed);
  Rng init(seeds.init);
  Rng update_rng(seeds.update);
  detail::PpoAgent agent(env.state_dim, env.action_dim, config.hidden_width, config.ppo, config.gamma, config.lambda,
                         config.normalize_advantages, config.scale_rewards, init);
  const StateNormalizer norm = detail::fit_input_normalizer(config, demo.states);
  const auto evals = eval_seeds(config.seed, config.eval_episodes);

  std::optional<adversary::AirlDiscriminator> airl;
  std::optional<adversary::StateDiscriminator> sdisc;
  adversary::DiscInput expert_input;
  adversary::PairBatch expert_pairs;
  if (algo == Algorithm::airl) {
    airl = adversary::AirlDiscriminator::create(env.state_dim, env.action_dim, norm, init, config.disc_lr,
                                                config.hidden_width);
    expert_pairs = {demo.states, *demo.actions};
  } else {
    const auto mode = disc_mode(algo);
    sdisc = adversary::StateDiscriminator::create(mode, env.state_dim, env.action_dim, norm, init, config.disc_lr,
                                                  config.hidden_width);
    if (mode == adversary::DiscMode::gaifo)
      expert_input = transition_pairs(demo.states, env.episode_length);
    else
      expert_input = {demo.states, std::nullopt,
                      mode == adversary::DiscMode::gail_sa ? std::optional(*demo.actions) : std::nullopt};
  }

  if (!config.run_dir.empty()) detail::ensure_dir(config.run_dir);
  TrainResult result;
  long steps = 0;
  const int iterations = config.iterations();
  for (int it = 1; it <= iterations; ++it) {
    try {
      IterationMetrics m;
      m.iter = it;
      auto trajs = rollout::collect(agent.policy, agent.value_fn, env, config.dynamics, config.steps_per_iter,
                                    derive_seed(seeds.collect, static_cast<std::uint64_t>(it)));
      for (const auto& tr : trajs) steps += tr.length();

      if (airl) {
        const auto res = adversary::airl_update(*airl, expert_pairs, detail::concat_pairs(trajs), agent.policy,
                                                config.disc_steps);
        m.disc_loss = res.loss_after;
        for (auto& tr : trajs)
          tr.rewards = adversary::imitation_rewards(*airl, tr.states, *tr.actions, config.log_pi_weight * tr.log_probs);
      } else {
        std::vector<adversary::DiscInput> parts;
        for (const auto& tr : trajs) parts.push_back(policy_input(sdisc->mode, tr));
        const auto res = adversary::state_disc_update(*sdisc, expert_input, concat_inputs(parts), config.disc_steps);
        m.disc_loss = res.loss_after;
        for (std::size_t k = 0; k < trajs.size(); ++k) trajs[k].rewards = sdisc->rewards(parts[k]);
      }
      const auto stats = agent.update(trajs, update_rng);

      m.steps = steps;
      m.mean_return = rollout::evaluate(agent.policy, env, config.dynamics, evals);
      m.w1 = m.buffer_score = m.critic_obj = std::numeric_limits<double>::quiet_NaN();
      m.entropy = stats.entropy;
      result.metrics.push_back(m);
    } catch (const NumericError& e) {
      detail::record_failure(config, it, e.what());
      throw;
    }
  }

  result.policy = agent.policy;
  result.final_return = result.metrics.empty() ? 0.0 : result.metrics.back().mean_return;
  if (!config.run_dir.empty()) {
    write_metrics_csv(config.run_dir / "metrics.csv", result.metrics);
    policy::save_policy(agent.policy, config.run_dir / "policy.ckpt");
    if (airl) {
      save_airl(*airl, config.run_dir / "disc.ckpt");
    } else {
      std::ofstream out(config.run_dir / "disc.ckpt");
      out << "state_disc " << adversary::to_string(sdisc->mode) << '\n';
      sdisc->net.save(out);
      sdisc->normalizer.save(out);
    }
  }
  return result;
}

}  // namespace i2l::trainers
