#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>

namespace i2l {
struct Trajectory;
}

// Analytic continuous-control tasks whose gravity, mass and friction can be
// scaled independently of each other.
namespace i2l::envs {

enum class EnvKind { pointmass2d, pendulum };

std::string to_string(EnvKind kind);
EnvKind parse_env_kind(const std::string& name);

// Multiplicative knobs on the base dynamics; (1,1,1) is the expert's MDP.
// mass_scale plays the role of body density.
struct DynamicsConfig {
  double gravity_scale = 1.0;
  double mass_scale = 1.0;
  double friction_scale = 1.0;

  void validate() const;
  bool is_default() const { return gravity_scale == 1.0 && mass_scale == 1.0 && friction_scale == 1.0; }
};

// state_dim is the observation width: what trajectories, demos and every
// network see. raw_dim is the number of physical coordinates.
struct EnvSpec {
  EnvKind kind = EnvKind::pendulum;
  int state_dim = 3;
  int raw_dim = 2;
  int action_dim = 1;
  int episode_length = 200;
  double dt = 0.05;

  static EnvSpec make(EnvKind kind);
  void validate() const;
};

struct EnvState {
  Eigen::VectorXd coords;  // pointmass2d: [px, py, vx, vy]; pendulum: [theta, theta_dot]
  int step = 0;
};

struct StepResult {
  EnvState state;
  Eigen::VectorXd observation;
  double reward = 0.0;
  bool done = false;
};

struct ResetResult {
  EnvState state;
  Eigen::VectorXd observation;
};

namespace pointmass {
inline constexpr double kMass = 1.0;
inline constexpr double kFriction = 0.5;
inline constexpr double kGravity = 1.0;
inline constexpr double kInitHalfWidth = 4.0;
inline constexpr double kBound = 5.0;
inline constexpr double kGoalX = 3.0;
inline constexpr double kGoalY = 3.0;
}  // namespace pointmass

namespace pendulum {
inline constexpr double kGravity = 10.0;
inline constexpr double kLength = 1.0;
inline constexpr double kMass = 1.0;
inline constexpr double kDamping = 0.1;
inline constexpr double kMaxSpeed = 8.0;
inline constexpr double kTorqueScale = 2.0;
}  // namespace pendulum

Eigen::VectorXd observe(const EnvSpec& spec, const EnvState& state);

ResetResult reset(const EnvSpec& spec, const DynamicsConfig& config, std::uint64_t seed);

// Pure function of its arguments. The action is clamped to [-1, 1] before it
// enters the dynamics; a non-finite action throws NumericError.
StepResult step(const EnvState& state, const Eigen::VectorXd& action, const EnvSpec& spec,
                const DynamicsConfig& config);

// Undiscounted sum of the trajectory's true environment rewards.
double episode_return(const Trajectory& traj);

// Maps an angle to [-pi, pi).
double wrap_angle(double theta);

}  // namespace i2l::envs
