#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "i2l/envs.hpp"
#include "i2l/errors.hpp"
#include "i2l/rng.hpp"
#include "i2l/trajectory.hpp"

using namespace i2l;
using namespace i2l::envs;

namespace {

EnvState pm_state(double px, double py, double vx, double vy) {
  EnvState s;
  s.coords = Eigen::VectorXd(4);
  s.coords << px, py, vx, vy;
  return s;
}

EnvState pd_state(double theta, double theta_dot) {
  EnvState s;
  s.coords = Eigen::VectorXd(2);
  s.coords << theta, theta_dot;
  return s;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// Same operations as the unscaled dynamics, written without the config.
EnvState base_step(const EnvSpec& spec, const EnvState& s, Eigen::VectorXd a) {
  a = a.cwiseMax(-1.0).cwiseMin(1.0);
  EnvState n;
  n.step = s.step + 1;
  n.coords = s.coords;
  if (spec.kind == EnvKind::pointmass2d) {
    for (int i = 0; i < 2; ++i) {
      const double g = i == 1 ? -1.0 : 0.0;
      const double v = s.coords[2 + i] + spec.dt * ((a[i] - 0.5 * s.coords[2 + i]) / 1.0 + g);
      n.coords[2 + i] = v;
      n.coords[i] = std::clamp(s.coords[i] + spec.dt * v, -5.0, 5.0);
    }
  } else {
    const double accel = 1.0 * (3.0 * 10.0 / (2.0 * 1.0)) * std::sin(s.coords[0]) - 1.0 * 0.1 * s.coords[1] +
                         3.0 * (2.0 * a[0]) / (1.0 * 1.0 * 1.0 * 1.0);
    const double td = std::clamp(s.coords[1] + spec.dt * accel, -8.0, 8.0);
    n.coords << s.coords[0] + spec.dt * td, td;
  }
  return n;
}

}  // namespace

TEST(Spec, DimsPerKind) {
  const auto pd = EnvSpec::make(EnvKind::pendulum);
  EXPECT_EQ(pd.state_dim, 3);
  EXPECT_EQ(pd.action_dim, 1);
  EXPECT_EQ(pd.episode_length, 200);
  EXPECT_DOUBLE_EQ(pd.dt, 0.05);
  const auto pm = EnvSpec::make(EnvKind::pointmass2d);
  EXPECT_EQ(pm.state_dim, 4);
  EXPECT_EQ(pm.action_dim, 2);
  EXPECT_THROW(parse_env_kind("hopper"), ContractError);
  EXPECT_EQ(parse_env_kind("pointmass2d"), EnvKind::pointmass2d);
}

TEST(Dynamics, RejectsNonPositiveScales) {
  DynamicsConfig c;
  c.gravity_scale = 0.0;
  EXPECT_THROW(c.validate(), ContractError);
  c.gravity_scale = 1.0;
  c.mass_scale = -2.0;
  EXPECT_THROW(c.validate(), ContractError);
  c.mass_scale = 1.0;
  c.friction_scale = std::nan("");
  EXPECT_THROW(c.validate(), ContractError);
  EXPECT_THROW(reset(EnvSpec::make(EnvKind::pendulum), c, 0), ContractError);
}

TEST(Reset, DeterministicPerSeed) {
  for (auto kind : {EnvKind::pendulum, EnvKind::pointmass2d}) {
    const auto spec = EnvSpec::make(kind);
    const auto a = reset(spec, {}, 42);
    const auto b = reset(spec, {}, 42);
    EXPECT_EQ(a.observation, b.observation);
    EXPECT_EQ(a.state.step, 0);
    EXPECT_NE(reset(spec, {}, 43).observation, a.observation);
  }
}

TEST(Reset, InitialDistributions) {
  const auto pm = EnvSpec::make(EnvKind::pointmass2d);
  const auto pd = EnvSpec::make(EnvKind::pendulum);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto r = reset(pm, {}, seed);
    EXPECT_LE(r.state.coords.head<2>().cwiseAbs().maxCoeff(), 4.0);
    EXPECT_TRUE(r.state.coords.tail<2>().isZero(0.0));
    const auto q = reset(pd, {}, seed);
    EXPECT_GE(q.state.coords[0], -std::numbers::pi);
    EXPECT_LE(q.state.coords[0], std::numbers::pi);
    EXPECT_LE(std::abs(q.state.coords[1]), 1.0);
    EXPECT_NEAR(q.observation[0], std::cos(q.state.coords[0]), 0.0);
    EXPECT_NEAR(q.observation[1], std::sin(q.state.coords[0]), 0.0);
  }
}

TEST(Step, PointmassNoForcesNoMotion) {
  const auto spec = EnvSpec::make(EnvKind::pointmass2d);
  DynamicsConfig c;
  c.gravity_scale = 1e-300;  // effectively zero; scales must stay positive
  const auto r = step(pm_state(1.0, -2.0, 0.0, 0.0), vec({0.0, 0.0}), spec, c);
  EXPECT_DOUBLE_EQ(r.state.coords[0], 1.0);
  EXPECT_DOUBLE_EQ(r.state.coords[1], -2.0);
  EXPECT_NEAR(r.state.coords[3], 0.0, 1e-300);
}

TEST(Step, PointmassHandComputedEulerStep) {
  const auto spec = EnvSpec::make(EnvKind::pointmass2d);
  const auto r = step(pm_state(0, 0, 0, 0), vec({1.0, 0.0}), spec, {});
  EXPECT_NEAR(r.state.coords[2], 0.05, 1e-15);
  EXPECT_NEAR(r.state.coords[3], -0.05, 1e-15);
  EXPECT_NEAR(r.state.coords[0], 0.0025, 1e-15);
  EXPECT_NEAR(r.state.coords[1], -0.0025, 1e-15);
  EXPECT_NEAR(r.reward, -std::hypot(3.0 - 0.0025, 3.0 + 0.0025), 1e-12);
  EXPECT_EQ(r.state.step, 1);
}

TEST(Step, PointmassClampsPositionAndAction) {
  const auto spec = EnvSpec::make(EnvKind::pointmass2d);
  const auto r = step(pm_state(4.99, 0, 10.0, 0), vec({50.0, 0.0}), spec, {});
  EXPECT_DOUBLE_EQ(r.state.coords[0], 5.0);
  const auto clamped = step(pm_state(0, 0, 0, 0), vec({1.0, 0.0}), spec, {});
  const auto big = step(pm_state(0, 0, 0, 0), vec({7.0, 0.0}), spec, {});
  EXPECT_EQ(clamped.state.coords, big.state.coords);
}

TEST(Step, PendulumUprightEquilibrium) {
  const auto spec = EnvSpec::make(EnvKind::pendulum);
  const auto r = step(pd_state(0.0, 0.0), vec({0.0}), spec, {});
  EXPECT_EQ(r.state.coords[1], 0.0);
  EXPECT_EQ(r.state.coords[0], 0.0);
  EXPECT_EQ(r.reward, 0.0);
}

TEST(Step, PendulumRewardUsesWrappedAngleAndTorque) {
  const auto spec = EnvSpec::make(EnvKind::pendulum);
  const double theta = 2.0 * std::numbers::pi + 0.5;
  const auto r = step(pd_state(theta, 1.5), vec({0.5}), spec, {});
  const double w = wrap_angle(theta);
  EXPECT_NEAR(w, 0.5, 1e-12);
  EXPECT_NEAR(r.reward, -(w * w + 0.1 * 1.5 * 1.5 + 0.001 * 1.0 * 1.0), 1e-12);
}

TEST(Step, PendulumSpeedClamp) {
  const auto spec = EnvSpec::make(EnvKind::pendulum);
  const auto r = step(pd_state(1.0, 7.99), vec({1.0}), spec, {});
  EXPECT_DOUBLE_EQ(r.state.coords[1], 8.0);
}

TEST(Step, ScalesChangeDynamicsInExpectedDirection) {
  const auto spec = EnvSpec::make(EnvKind::pendulum);
  DynamicsConfig low;
  low.gravity_scale = 0.5;
  const auto base = step(pd_state(0.3, 0.0), vec({0.0}), spec, {});
  const auto weak = step(pd_state(0.3, 0.0), vec({0.0}), spec, low);
  EXPECT_NEAR(weak.state.coords[1], 0.5 * base.state.coords[1], 1e-15);

  const auto pm = EnvSpec::make(EnvKind::pointmass2d);
  DynamicsConfig heavy;
  heavy.mass_scale = 2.0;
  heavy.friction_scale = 3.0;
  const auto v0 = step(pm_state(0, 0, 1.0, 0), vec({1.0, 0.0}), pm, {});
  const auto v1 = step(pm_state(0, 0, 1.0, 0), vec({1.0, 0.0}), pm, heavy);
  // (1 - 0.5) / 1 versus (1 - 1.5) / 2
  EXPECT_NEAR(v0.state.coords[2], 1.0 + 0.05 * 0.5, 1e-15);
  EXPECT_NEAR(v1.state.coords[2], 1.0 + 0.05 * -0.25, 1e-15);
}

TEST(Step, Errors) {
  const auto spec = EnvSpec::make(EnvKind::pendulum);
  EXPECT_THROW(step(pd_state(0, 0), vec({std::nan("")}), spec, {}), NumericError);
  EXPECT_THROW(step(pd_state(0, 0), vec({INFINITY}), spec, {}), NumericError);
  EXPECT_THROW(step(pd_state(0, 0), vec({0.0, 0.0}), spec, {}), ContractError);
  EnvState done = pd_state(0, 0);
  done.step = spec.episode_length;
  EXPECT_THROW(step(done, vec({0.0}), spec, {}), ContractError);
}

TEST(Step, DoneExactlyAtEpisodeLength) {
  const auto spec = EnvSpec::make(EnvKind::pointmass2d);
  auto r = reset(spec, {}, 3);
  EnvState s = r.state;
  for (int t = 1; t <= spec.episode_length; ++t) {
    const auto out = step(s, vec({0.1, 0.2}), spec, {});
    EXPECT_EQ(out.done, t == spec.episode_length);
    s = out.state;
  }
}

TEST(Property, ScaleNeutralAtIdentity) {
  for (auto kind : {EnvKind::pendulum, EnvKind::pointmass2d}) {
    const auto spec = EnvSpec::make(kind);
    Rng rng(11);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      EnvState s = reset(spec, {}, seed).state;
      EnvState b = s;
      for (int t = 0; t < spec.episode_length; ++t) {
        Eigen::VectorXd a(spec.action_dim);
        for (auto& x : a) x = 1.5 * nd(rng);
        s = step(s, a, spec, {}).state;
        b = base_step(spec, b, a);
        ASSERT_TRUE((s.coords.array() == b.coords.array()).all()) << "t=" << t;
      }
    }
  }
}

TEST(Property, StepIsPure) {
  const auto spec = EnvSpec::make(EnvKind::pendulum);
  const EnvState s = pd_state(1.0, -0.5);
  const auto a = step(s, vec({0.3}), spec, {});
  const auto b = step(s, vec({0.3}), spec, {});
  EXPECT_EQ(a.state.coords, b.state.coords);
  EXPECT_EQ(a.reward, b.reward);
  EXPECT_EQ(s.coords, vec({1.0, -0.5}));
}

TEST(Return, SumsEnvRewards) {
  Trajectory t;
  t.states = Eigen::MatrixXd::Zero(1, 3);
  t.env_rewards = Eigen::VectorXd::Zero(3);
  EXPECT_EQ(episode_return(t), 0.0);
  t.env_rewards = vec({1, 2, 3});
  EXPECT_EQ(episode_return(t), 6.0);
  t.env_rewards.reset();
  EXPECT_THROW(episode_return(t), ContractError);
}

TEST(Wrap, IntoHalfOpenRange) {
  EXPECT_NEAR(wrap_angle(3.0 * std::numbers::pi / 2.0), -std::numbers::pi / 2.0, 1e-12);
  EXPECT_NEAR(wrap_angle(-0.25), -0.25, 1e-15);
  EXPECT_NEAR(wrap_angle(std::numbers::pi), -std::numbers::pi, 1e-12);
}
