#include <fstream>

#include "i2l/errors.hpp"
#include "internal.hpp"

namespace i2l::trainers {

namespace {

// Buffer entries only need states and actions.
Trajectory strip(const Trajectory& tr) {
  Trajectory out;
  out.states = tr.states;
  out.actions = tr.actions;
  return out;
}

}  // namespace

TrainResult i2l_train(const TrainConfig& config, const EventHook& on_event) {
  if (config.algorithm != Algorithm::i2l) throw ContractError("i2l_train: algorithm must be i2l");
  config.validate();
  const rollout::Demo demo = rollout::load_demo(config.demo_path);
  if (demo.size() == 0) throw PreconditionError("i2l: empty demo");
  if (demo.states.rows() != config.env.state_dim) throw PreconditionError("i2l: demo state dim does not match env");
  // I2L never touches demo actions, even if the file has them.
  const Eigen::MatrixXd& expert_states = demo.states;

  auto emit = [&](std::string_view e) {
    if (on_event) on_event(e);
  };

  const auto seeds = detail::run_seeds(config.seed);
  Rng init(seeds.init);
  Rng update_rng(seeds.update);
  const auto& env = config.env;
  detail::PpoAgent agent(env.state_dim, env.action_dim, config.hidden_width, config.ppo, config.gamma, config.lambda,
                         config.normalize_advantages, config.scale_rewards, init);
  const StateNormalizer norm = detail::fit_input_normalizer(config, expert_states);
  auto disc = adversary::AirlDiscriminator::create(env.state_dim, env.action_dim, norm, init, config.disc_lr,
                                                   config.hidden_width);
  auto critic =
      wcritic::WassersteinCritic::create(env.state_dim, norm, init, config.clip_bound, config.critic_lr, config.hidden_width);
  buffer::PriorityBuffer buf(config.buffer_capacity);
  const auto evals = eval_seeds(config.seed, config.eval_episodes);

  if (!config.run_dir.empty()) {
    detail::ensure_dir(config.run_dir);
    if (config.snapshot_every > 0) detail::ensure_dir(config.run_dir / "snapshots");
  }

  TrainResult result;
  long steps = 0;
  const int iterations = config.iterations();
  for (int it = 1; it <= iterations; ++it) {
    const auto it_seed = static_cast<std::uint64_t>(it);
    try {
      IterationMetrics m;
      m.iter = it;

      // Run pi_theta and collect trajectories.
      auto trajs = rollout::collect(agent.policy, agent.value_fn, env, config.dynamics, config.steps_per_iter,
                                    derive_seed(seeds.collect, it_seed));
      for (const auto& tr : trajs) steps += tr.length();
      emit("collect");

      // Wasserstein critic on expert states vs buffer states. The buffer is
      // empty on the first iteration, which skips this step.
      m.critic_obj = std::numeric_limits<double>::quiet_NaN();
      if (!buf.empty()) {
        const Eigen::MatrixXd buffer_states =
            detail::subsample_columns(buf.all_states(), config.critic_buffer_max, derive_seed(seeds.sample, it_seed));
        m.critic_obj = wcritic::critic_update(critic, expert_states, buffer_states, config.critic_steps);
        emit("critic_update");
      }

      // Score the new trajectories.
      std::vector<double> scores;
      for (const auto& tr : trajs) scores.push_back(wcritic::score_trajectory(critic, tr));
      emit("score");

      // Priority-queue protocol: refresh stored scores, then offer each one.
      buf.rescore_all(critic);
      for (std::size_t k = 0; k < trajs.size(); ++k) buf.offer_scored(strip(trajs[k]), scores[k]);
      emit("buffer_offer");

      // AIRL discriminator: buffer pairs are positives, fresh pairs negatives.
      const adversary::PairBatch negatives = detail::concat_pairs(trajs);
      const adversary::PairBatch positives =
          buf.sample_pairs(static_cast<std::size_t>(negatives.size()), derive_seed(seeds.sample, (1ULL << 40) + it_seed));
      const auto disc_result = adversary::airl_update(disc, positives, negatives, agent.policy, config.disc_steps);
      m.disc_loss = disc_result.loss_after;
      emit("airl_update");

      // PPO with log D - log(1 - D) = f - log pi as rewards. The policy has not
      // changed since collection, so the recorded log-probs are current.
      for (auto& tr : trajs)
        tr.rewards = adversary::imitation_rewards(disc, tr.states, *tr.actions, config.log_pi_weight * tr.log_probs);
      const auto stats = agent.update(trajs, update_rng);
      emit("ppo_update");

      const Eigen::MatrixXd buffer_states =
          detail::subsample_columns(buf.all_states(), config.critic_buffer_max, derive_seed(seeds.sample, it_seed));
      m.w1 = wcritic::w1_estimate(critic, expert_states, buffer_states);
      m.buffer_score = buf.mean_score();
      m.steps = steps;
      m.mean_return = rollout::evaluate(agent.policy, env, config.dynamics, evals);
      m.entropy = stats.entropy;
      result.metrics.push_back(m);

      if (!config.run_dir.empty() && config.snapshot_every > 0 && (it == 1 || it % config.snapshot_every == 0))
        buffer::save_buffer(buf, config.run_dir / "snapshots" / ("buffer_" + std::to_string(it) + ".ckpt"));
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
    save_airl(disc, config.run_dir / "disc.ckpt");
    save_critic(critic, config.run_dir / "critic.ckpt");
    buffer::save_buffer(buf, config.run_dir / "buffer.ckpt");
  }
  return result;
}

}  // namespace i2l::trainers
