#include "i2l/rollout.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <string>

#include "i2l/errors.hpp"
#include "i2l/rng.hpp"

namespace i2l {

void Trajectory::validate() const {
  const Eigen::Index n = states.cols();
  if (actions && actions->cols() != n) throw ContractError("trajectory: |actions| != |states|");
  if (rewards && rewards->size() != n) throw ContractError("trajectory: |rewards| != |states|");
  if (env_rewards && env_rewards->size() != n) throw ContractError("trajectory: |env_rewards| != |states|");
  if (!states.allFinite() || (actions && !actions->allFinite()) || (rewards && !rewards->allFinite()) ||
      (env_rewards && !env_rewards->allFinite()))
    throw ContractError("trajectory: non-finite entry");
}

namespace rollout {

namespace {

constexpr std::uint64_t kNoiseStream = 1ULL << 32;

void check_finite(const Eigen::VectorXd& v, const char* what) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i])) throw NumericError(what, v[i]);
}

}  // namespace

std::vector<Trajectory> collect(const policy::GaussianPolicy& pol, const policy::ValueFunction& value_fn,
                                const envs::EnvSpec& spec, const envs::DynamicsConfig& config, int n_steps,
                                std::uint64_t seed, CollectOptions options) {
  if (n_steps < spec.episode_length) throw ContractError("collect: n_steps < episode_length");
  const int episodes = n_steps / spec.episode_length;
  std::vector<Trajectory> out;
  out.reserve(static_cast<std::size_t>(episodes));
  for (int e = 0; e < episodes; ++e) {
    const auto ep = static_cast<std::uint64_t>(e);
    Rng noise(derive_seed(seed, kNoiseStream + ep));
    auto [state, obs] = envs::reset(spec, config, derive_seed(seed, ep));
    const int T = spec.episode_length;
    Trajectory traj;
    traj.states.resize(spec.state_dim, T);
    traj.actions = Eigen::MatrixXd(spec.action_dim, T);
    traj.env_rewards = Eigen::VectorXd(T);
    traj.log_probs.resize(T);
    for (int t = 0; t < T; ++t) {
      traj.states.col(t) = obs;
      policy::ActionSample s;
      if (options.deterministic) {
        s.action = pol.mean(obs);
        s.log_prob = pol.log_prob(obs, s.action);
      } else {
        s = policy::sample(pol, obs, noise);
      }
      check_finite(s.action, "collect: non-finite policy output");
      traj.actions->col(t) = s.action;
      traj.log_probs[t] = s.log_prob;
      auto r = envs::step(state, s.action, spec, config);
      (*traj.env_rewards)[t] = r.reward;
      state = std::move(r.state);
      obs = std::move(r.observation);
    }
    traj.values = value_fn.values(traj.states);
    traj.final_state = obs;
    traj.bootstrap_value = value_fn.value(obs);
    out.push_back(std::move(traj));
  }
  return out;
}

Trajectory run_episode(const policy::GaussianPolicy& pol, const envs::EnvSpec& spec,
                       const envs::DynamicsConfig& config, std::uint64_t seed, bool deterministic) {
  Rng noise(derive_seed(seed, kNoiseStream));
  auto [state, obs] = envs::reset(spec, config, seed);
  const int T = spec.episode_length;
  Trajectory traj;
  traj.states.resize(spec.state_dim, T);
  traj.actions = Eigen::MatrixXd(spec.action_dim, T);
  traj.env_rewards = Eigen::VectorXd(T);
  for (int t = 0; t < T; ++t) {
    traj.states.col(t) = obs;
    Eigen::VectorXd a = deterministic ? pol.mean(obs) : policy::sample(pol, obs, noise).action;
    check_finite(a, "run_episode: non-finite policy output");
    traj.actions->col(t) = a;
    auto r = envs::step(state, a, spec, config);
    (*traj.env_rewards)[t] = r.reward;
    state = std::move(r.state);
    obs = std::move(r.observation);
  }
  traj.final_state = obs;
  return traj;
}

Trajectory random_episode(const envs::EnvSpec& spec, const envs::DynamicsConfig& config, std::uint64_t seed) {
  Rng noise(derive_seed(seed, kNoiseStream));
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  auto [state, obs] = envs::reset(spec, config, seed);
  const int T = spec.episode_length;
  Trajectory traj;
  traj.states.resize(spec.state_dim, T);
  traj.actions = Eigen::MatrixXd(spec.action_dim, T);
  traj.env_rewards = Eigen::VectorXd(T);
  for (int t = 0; t < T; ++t) {
    traj.states.col(t) = obs;
    Eigen::VectorXd a(spec.action_dim);
    for (auto& x : a) x = uni(noise);
    traj.actions->col(t) = a;
    auto r = envs::step(state, a, spec, config);
    (*traj.env_rewards)[t] = r.reward;
    state = std::move(r.state);
    obs = std::move(r.observation);
  }
  traj.final_state = obs;
  return traj;
}

GaeResult compute_gae(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values, double last_value,
                      double gamma, double lambda) {
  if (rewards.size() != values.size()) throw ContractError("compute_gae: |values| != |rewards|");
  if (!(gamma > 0.0 && gamma <= 1.0) || !(lambda >= 0.0 && lambda <= 1.0))
    throw ContractError("compute_gae: gamma must be in (0,1] and lambda in [0,1]");
  const Eigen::Index T = rewards.size();
  GaeResult out{Eigen::VectorXd(T), Eigen::VectorXd(T)};
  double running = 0.0;
  for (Eigen::Index t = T; t-- > 0;) {
    const double next_v = t + 1 < T ? values[t + 1] : last_value;
    const double delta = rewards[t] + gamma * next_v - values[t];
    running = delta + gamma * lambda * running;
    out.advantages[t] = running;
  }
  out.returns = out.advantages + values;
  return out;
}

RolloutBatch build_batch(const std::vector<Trajectory>& trajectories, const BatchOptions& options) {
  if (trajectories.empty()) throw ContractError("build_batch: no trajectories");
  Eigen::Index n = 0;
  for (const auto& tr : trajectories) {
    if (!tr.rewards || !tr.actions) throw ContractError("build_batch: trajectory lacks rewards or actions");
    n += tr.length();
  }
  const auto& first = trajectories.front();
  RolloutBatch b;
  b.states.resize(first.states.rows(), n);
  b.actions.resize(first.actions->rows(), n);
  b.log_probs.resize(n);
  b.values.resize(n);
  b.rewards.resize(n);
  b.advantages.resize(n);
  b.returns.resize(n);
  b.dones.assign(static_cast<std::size_t>(n), false);
  Eigen::Index at = 0;
  for (const auto& tr : trajectories) {
    const Eigen::Index T = tr.length();
    auto gae = compute_gae(*tr.rewards, tr.values, tr.bootstrap_value, options.gamma, options.lambda);
    b.states.middleCols(at, T) = tr.states;
    b.actions.middleCols(at, T) = *tr.actions;
    b.log_probs.segment(at, T) = tr.log_probs;
    b.values.segment(at, T) = tr.values;
    b.rewards.segment(at, T) = *tr.rewards;
    b.advantages.segment(at, T) = gae.advantages;
    b.returns.segment(at, T) = gae.returns;
    b.dones[static_cast<std::size_t>(at + T - 1)] = true;
    at += T;
  }
  if (!b.advantages.allFinite()) throw NumericError("build_batch: non-finite advantage", b.advantages.sum());
  if (options.normalize_advantages && n > 1) {
    const double mean = b.advantages.mean();
    const double var = (b.advantages.array() - mean).square().sum() / static_cast<double>(n);
    b.advantages = (b.advantages.array() - mean) / (std::sqrt(var) + 1e-8);
  }
  return b;
}

double evaluate(const policy::GaussianPolicy& pol, const envs::EnvSpec& spec, const envs::DynamicsConfig& config,
                const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw ContractError("evaluate: no seeds");
  double total = 0.0;
  for (auto s : seeds) total += envs::episode_return(run_episode(pol, spec, config, s, true));
  return total / static_cast<double>(seeds.size());
}

void write_demo(std::ostream& out, const Demo& demo) {
  const auto n = demo.states.cols();
  if (demo.actions) {
    if (demo.actions->cols() != n) throw ContractError("write_demo: |actions| != |states|");
    out << "demo-sa v1 " << demo.states.rows() << ' ' << demo.actions->rows() << ' ' << n << '\n';
  } else {
    out << "demo v1 " << demo.states.rows() << ' ' << n << '\n';
  }
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index t = 0; t < n; ++t) {
    for (Eigen::Index i = 0; i < demo.states.rows(); ++i) out << (i ? " " : "") << demo.states(i, t);
    if (demo.actions)
      for (Eigen::Index i = 0; i < demo.actions->rows(); ++i) out << ' ' << (*demo.actions)(i, t);
    out << '\n';
  }
}

Demo read_demo(std::istream& in) {
  std::string magic, version;
  if (!(in >> magic >> version) || version != "v1") throw ContractError("not a demo v1 file");
  long state_dim = 0, action_dim = 0, n = 0;
  if (magic == "demo") {
    if (!(in >> state_dim >> n)) throw ContractError("bad demo header");
  } else if (magic == "demo-sa") {
    if (!(in >> state_dim >> action_dim >> n) || action_dim <= 0) throw ContractError("bad demo-sa header");
  } else {
    throw ContractError("unknown demo kind '" + magic + "'");
  }
  if (state_dim <= 0 || n < 0) throw ContractError("bad demo dims");
  Demo d;
  d.states.resize(state_dim, n);
  if (action_dim > 0) d.actions = Eigen::MatrixXd(action_dim, n);
  for (long t = 0; t < n; ++t) {
    for (long i = 0; i < state_dim; ++i)
      if (!(in >> d.states(i, t))) throw ContractError("truncated demo at state " + std::to_string(t));
    for (long i = 0; i < action_dim; ++i)
      if (!(in >> (*d.actions)(i, t))) throw ContractError("truncated demo at state " + std::to_string(t));
  }
  return d;
}

void save_demo(const Demo& demo, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ContractError("cannot write " + path.string());
  write_demo(out, demo);
}

Demo load_demo(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot read demo " + path.string());
  return read_demo(in);
}

std::vector<Eigen::MatrixXd> split_episodes(const Eigen::MatrixXd& states, int episode_length) {
  if (episode_length <= 0) throw ContractError("split_episodes: episode_length must be positive");
  std::vector<Eigen::MatrixXd> out;
  for (Eigen::Index at = 0; at < states.cols(); at += episode_length)
    out.emplace_back(states.middleCols(at, std::min<Eigen::Index>(episode_length, states.cols() - at)));
  return out;
}

}  // namespace rollout
}  // namespace i2l
