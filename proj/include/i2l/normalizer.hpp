#pragma once

#include <Eigen/Dense>

#include <iosfwd>

namespace i2l {

// Frozen per-dimension standardisation of network inputs. Statistics are
// computed once (from the expert demo) and shared by the discriminators and
// the Wasserstein critic.
struct StateNormalizer {
  static constexpr double kMinStd = 1e-2;
  static constexpr double kClip = 10.0;

  Eigen::VectorXd mean;
  Eigen::VectorXd std;

  static StateNormalizer identity(Eigen::Index dim) {
    return {Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)};
  }
  static StateNormalizer fit(const Eigen::MatrixXd& samples);

  Eigen::Index dim() const { return mean.size(); }
  Eigen::MatrixXd apply(const Eigen::MatrixXd& states) const;

  void save(std::ostream& out) const;
  static StateNormalizer load(std::istream& in);
};

}  // namespace i2l
