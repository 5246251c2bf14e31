#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "i2l/errors.hpp"
#include "internal.hpp"

namespace i2l::trainers {

ExpertResult train_expert(const ExpertConfig& config) {
  config.env.validate();
  config.dynamics.validate();
  if (config.steps <= 0) throw ContractError("expert: steps must be > 0");
  if (config.demo_states <= 0) throw ContractError("expert: demo_states must be > 0");

  const auto seeds = detail::run_seeds(config.seed);
  Rng init(seeds.init);
  Rng update_rng(seeds.update);
  detail::PpoAgent agent(config.env.state_dim, config.env.action_dim, config.hidden_width, config.ppo, config.gamma,
                         config.lambda, true, config.scale_rewards, init);
  const auto evals = eval_seeds(config.seed, config.eval_episodes);

  ExpertResult result;
  const long iterations = config.steps / config.steps_per_iter;
  long steps = 0;
  for (long it = 1; it <= iterations; ++it) {
    auto trajs = rollout::collect(agent.policy, agent.value_fn, config.env, config.dynamics, config.steps_per_iter,
                                  derive_seed(seeds.collect, static_cast<std::uint64_t>(it)));
    for (auto& tr : trajs) {
      tr.rewards = *tr.env_rewards;
      steps += tr.length();
    }
    const auto stats = agent.update(trajs, update_rng);
    IterationMetrics m;
    m.iter = static_cast<int>(it);
    m.steps = steps;
    m.mean_return = rollout::evaluate(agent.policy, config.env, config.dynamics, evals);
    m.w1 = m.buffer_score = m.disc_loss = m.critic_obj = std::numeric_limits<double>::quiet_NaN();
    m.entropy = stats.entropy;
    result.metrics.push_back(m);
  }
  result.policy = agent.policy;
  result.eval_return = rollout::evaluate(agent.policy, config.env, config.dynamics, evals);

  // Demo: best deterministic episodes by true return.
  std::vector<Trajectory> candidates;
  std::vector<double> returns;
  for (int k = 0; k < config.candidate_episodes; ++k) {
    candidates.push_back(rollout::run_episode(agent.policy, config.env, config.dynamics,
                                              derive_seed(derive_seed(config.seed, 0xDE30), static_cast<std::uint64_t>(k)),
                                              true));
    returns.push_back(envs::episode_return(candidates.back()));
  }
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return returns[a] > returns[b]; });

  const Eigen::Index need = config.demo_states;
  Eigen::MatrixXd states(config.env.state_dim, need);
  Eigen::MatrixXd actions(config.env.action_dim, need);
  Eigen::Index at = 0;
  for (std::size_t k : order) {
    if (at >= need) break;
    const Eigen::Index take = std::min<Eigen::Index>(need - at, candidates[k].length());
    states.middleCols(at, take) = candidates[k].states.leftCols(take);
    actions.middleCols(at, take) = candidates[k].actions->leftCols(take);
    at += take;
  }
  if (at < need) throw ContractError("expert: not enough candidate episodes for the demo length");
  result.demo = {states, std::nullopt};
  result.demo_sa = {states, actions};
  return result;
}

}  // namespace i2l::trainers
