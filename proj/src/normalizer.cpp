#include "i2l/normalizer.hpp"

#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "i2l/errors.hpp"

namespace i2l {

StateNormalizer StateNormalizer::fit(const Eigen::MatrixXd& samples) {
  if (samples.cols() == 0) throw ContractError("normalizer: no samples");
  StateNormalizer n;
  n.mean = samples.rowwise().mean();
  const Eigen::MatrixXd centered = samples.colwise() - n.mean;
  n.std = (centered.array().square().rowwise().sum() / static_cast<double>(samples.cols())).sqrt().matrix();
  n.std = n.std.cwiseMax(kMinStd);
  return n;
}

Eigen::MatrixXd StateNormalizer::apply(const Eigen::MatrixXd& states) const {
  if (states.rows() != mean.size()) throw ContractError("normalizer: dim mismatch");
  Eigen::ArrayXXd z = (states.colwise() - mean).array().colwise() / std.array();
  return z.cwiseMax(-kClip).cwiseMin(kClip).matrix();
}

void StateNormalizer::save(std::ostream& out) const {
  out << "normalizer " << mean.size() << '\n' << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index i = 0; i < mean.size(); ++i) out << (i ? " " : "") << mean[i];
  out << '\n';
  for (Eigen::Index i = 0; i < std.size(); ++i) out << (i ? " " : "") << std[i];
  out << '\n';
}

StateNormalizer StateNormalizer::load(std::istream& in) {
  std::string tag;
  Eigen::Index n = 0;
  if (!(in >> tag >> n) || tag != "normalizer" || n <= 0) throw ContractError("missing normalizer block");
  StateNormalizer s{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (auto& v : s.mean)
    if (!(in >> v)) throw ContractError("truncated normalizer");
  for (auto& v : s.std)
    if (!(in >> v)) throw ContractError("truncated normalizer");
  return s;
}

}  // namespace i2l
