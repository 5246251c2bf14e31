#include "i2l/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "i2l/errors.hpp"
#include "i2l/rng.hpp"
#include "i2l/trajectory.hpp"

namespace i2l::envs {

std::string to_string(EnvKind kind) { return kind == EnvKind::pendulum ? "pendulum" : "pointmass2d"; }

EnvKind parse_env_kind(const std::string& name) {
  if (name == "pendulum") return EnvKind::pendulum;
  if (name == "pointmass2d") return EnvKind::pointmass2d;
  throw ContractError("unknown env '" + name + "' (expected pointmass2d|pendulum)");
}

void DynamicsConfig::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(gravity_scale) || !positive(mass_scale) || !positive(friction_scale))
    throw ContractError("dynamics scales must be finite and strictly positive");
}

EnvSpec EnvSpec::make(EnvKind kind) {
  EnvSpec s;
  s.kind = kind;
  if (kind == EnvKind::pendulum) {
    s.state_dim = 3;
    s.raw_dim = 2;
    s.action_dim = 1;
  } else {
    s.state_dim = 4;
    s.raw_dim = 4;
    s.action_dim = 2;
  }
  s.episode_length = 200;
  s.dt = 0.05;
  return s;
}

void EnvSpec::validate() const {
  const EnvSpec ref = make(kind);
  if (episode_length <= 0 || !(dt > 0.0)) throw ContractError("episode_length and dt must be positive");
  if (state_dim != ref.state_dim || raw_dim != ref.raw_dim || action_dim != ref.action_dim)
    throw ContractError("env spec dims do not match " + to_string(kind));
}

double wrap_angle(double theta) {
  constexpr double pi = std::numbers::pi;
  double w = std::fmod(theta + pi, 2.0 * pi);
  if (w < 0.0) w += 2.0 * pi;
  return w - pi;
}

Eigen::VectorXd observe(const EnvSpec& spec, const EnvState& state) {
  if (spec.kind == EnvKind::pointmass2d) return state.coords;
  Eigen::VectorXd obs(3);
  obs << std::cos(state.coords[0]), std::sin(state.coords[0]), state.coords[1];
  return obs;
}

ResetResult reset(const EnvSpec& spec, const DynamicsConfig& config, std::uint64_t seed) {
  spec.validate();
  config.validate();
  Rng rng(seed);
  EnvState st;
  if (spec.kind == EnvKind::pointmass2d) {
    std::uniform_real_distribution<double> pos(-pointmass::kInitHalfWidth, pointmass::kInitHalfWidth);
    st.coords = Eigen::VectorXd::Zero(4);
    st.coords[0] = pos(rng);
    st.coords[1] = pos(rng);
  } else {
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    std::uniform_real_distribution<double> speed(-1.0, 1.0);
    st.coords = Eigen::VectorXd(2);
    st.coords[0] = angle(rng);
    st.coords[1] = speed(rng);
  }
  st.step = 0;
  return {st, observe(spec, st)};
}

StepResult step(const EnvState& state, const Eigen::VectorXd& action, const EnvSpec& spec,
                const DynamicsConfig& config) {
  if (action.size() != spec.action_dim) throw ContractError("step: action dim mismatch");
  for (Eigen::Index i = 0; i < action.size(); ++i)
    if (!std::isfinite(action[i])) throw NumericError("step: non-finite action", action[i]);
  if (state.step >= spec.episode_length) throw ContractError("step: episode already finished");

  const Eigen::VectorXd a = action.cwiseMax(-1.0).cwiseMin(1.0);
  const double dt = spec.dt;
  StepResult r;
  r.state.step = state.step + 1;

  if (spec.kind == EnvKind::pointmass2d) {
    using namespace pointmass;
    const Eigen::Vector2d p = state.coords.head<2>();
    const Eigen::Vector2d v = state.coords.tail<2>();
    const Eigen::Vector2d g(0.0, -kGravity * config.gravity_scale);
    const double mass = config.mass_scale * kMass;
    const double drag = config.friction_scale * kFriction;
    const Eigen::Vector2d force(a[0], a[1]);
    const Eigen::Vector2d v_next = v + dt * ((force - drag * v) / mass + g);
    const Eigen::Vector2d p_next = (p + dt * v_next).cwiseMax(-kBound).cwiseMin(kBound);
    r.state.coords = Eigen::VectorXd(4);
    r.state.coords << p_next, v_next;
    r.reward = -(p_next - Eigen::Vector2d(kGoalX, kGoalY)).norm();
  } else {
    using namespace pendulum;
    const double theta = state.coords[0];
    const double theta_dot = state.coords[1];
    const double u = kTorqueScale * a[0];
    const double accel = config.gravity_scale * (3.0 * kGravity / (2.0 * kLength)) * std::sin(theta) -
                         config.friction_scale * kDamping * theta_dot +
                         3.0 * u / (config.mass_scale * kMass * kLength * kLength);
    const double w = wrap_angle(theta);
    r.reward = -(w * w + 0.1 * theta_dot * theta_dot + 0.001 * u * u);
    const double theta_dot_next = std::clamp(theta_dot + dt * accel, -kMaxSpeed, kMaxSpeed);
    r.state.coords = Eigen::VectorXd(2);
    r.state.coords << theta + dt * theta_dot_next, theta_dot_next;
  }
  r.observation = observe(spec, r.state);
  r.done = r.state.step >= spec.episode_length;
  return r;
}

double episode_return(const Trajectory& traj) {
  if (!traj.env_rewards) throw ContractError("episode_return: trajectory carries no rewards");
  return traj.env_rewards->sum();
}

}  // namespace i2l::envs
