#include "i2l/nn.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "i2l/errors.hpp"

namespace i2l::nn {

namespace {

void apply_activation(Activation act, Eigen::MatrixXd& z) {
  if (act == Activation::tanh) z = z.array().tanh().matrix();
}

// d(act)/dz expressed through the activation value h.
void scale_by_derivative(Activation act, const Eigen::MatrixXd& h, Eigen::MatrixXd& delta) {
  if (act == Activation::tanh) delta.array() *= (1.0 - h.array().square());
}

const char* activation_name(Activation act) { return act == Activation::tanh ? "tanh" : "identity"; }

Activation parse_activation(const std::string& name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "identity") return Activation::identity;
  throw ContractError("unknown activation '" + name + "'");
}

}  // namespace

Gradients& Gradients::operator+=(const Gradients& other) {
  if (other.layers.size() != layers.size()) throw ContractError("gradient layer count mismatch");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    layers[i].weight += other.layers[i].weight;
    layers[i].bias += other.layers[i].bias;
  }
  return *this;
}

Gradients& Gradients::operator*=(double scale) {
  for (auto& l : layers) {
    l.weight *= scale;
    l.bias *= scale;
  }
  return *this;
}

Eigen::VectorXd Gradients::flatten() const {
  Eigen::Index n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  Eigen::VectorXd flat(n);
  Eigen::Index at = 0;
  for (const auto& l : layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) flat[at++] = l.weight(r, c);
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) flat[at++] = l.bias[r];
  }
  return flat;
}

double Gradients::squared_norm() const {
  double s = 0.0;
  for (const auto& l : layers) s += l.weight.squaredNorm() + l.bias.squaredNorm();
  return s;
}

Network::Network(std::vector<Layer> layers, Activation hidden, Activation output)
    : layers_(std::move(layers)), hidden_(hidden), output_(output) {
  check_chain();
}

void Network::check_chain() const {
  if (layers_.empty()) throw ContractError("network needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.weight.rows() != l.bias.size())
      throw ContractError("layer " + std::to_string(i) + ": bias size does not match weight rows");
    if (i > 0 && layers_[i - 1].weight.rows() != l.weight.cols())
      throw ContractError("layer " + std::to_string(i) + ": input dim does not chain");
  }
}

Network Network::mlp(int input_dim, const std::vector<int>& hidden, int output_dim, Rng& rng) {
  if (input_dim <= 0 || output_dim <= 0) throw ContractError("network dims must be positive");
  std::vector<int> dims{input_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(output_dim);
  std::vector<Layer> layers;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const int in = dims[i];
    const int out = dims[i + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> uni(-limit, limit);
    Layer l{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(out)};
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c) l.weight(r, c) = uni(rng);
    layers.push_back(std::move(l));
  }
  return Network(std::move(layers));
}

Network Network::standard(int input_dim, int output_dim, Rng& rng, int width) {
  return mlp(input_dim, {width, width}, output_dim, rng);
}

int Network::input_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.cols());
}

int Network::output_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.rows());
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

Eigen::VectorXd Network::forward(const Eigen::VectorXd& x) const {
  return forward_batch(Eigen::MatrixXd(x)).col(0);
}

Eigen::MatrixXd Network::forward_batch(const Eigen::MatrixXd& inputs) const {
  if (inputs.rows() != input_dim())
    throw ContractError("forward: input dim " + std::to_string(inputs.rows()) + " != " +
                        std::to_string(input_dim()));
  Eigen::MatrixXd h = inputs;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Eigen::MatrixXd z = layers_[i].weight * h;
    z.colwise() += layers_[i].bias;
    apply_activation(i + 1 == layers_.size() ? output_ : hidden_, z);
    h = std::move(z);
  }
  return h;
}

Eigen::MatrixXd Network::forward_batch(const Eigen::MatrixXd& inputs, ForwardCache& cache) const {
  if (inputs.rows() != input_dim())
    throw ContractError("forward: input dim " + std::to_string(inputs.rows()) + " != " +
                        std::to_string(input_dim()));
  cache.activations.clear();
  cache.activations.reserve(layers_.size() + 1);
  cache.activations.push_back(inputs);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Eigen::MatrixXd z = layers_[i].weight * cache.activations.back();
    z.colwise() += layers_[i].bias;
    apply_activation(i + 1 == layers_.size() ? output_ : hidden_, z);
    cache.activations.push_back(std::move(z));
  }
  return cache.activations.back();
}

Gradients Network::backward(const ForwardCache& cache, const Eigen::MatrixXd& output_grad) const {
  if (cache.activations.size() != layers_.size() + 1)
    throw ContractError("backward: cache does not belong to this network");
  const auto& out = cache.activations.back();
  if (output_grad.rows() != out.rows() || output_grad.cols() != out.cols())
    throw ContractError("backward: output gradient shape mismatch");

  Gradients g;
  g.layers.resize(layers_.size());
  Eigen::MatrixXd delta = output_grad;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    scale_by_derivative(k + 1 == layers_.size() ? output_ : hidden_, cache.activations[k + 1], delta);
    g.layers[k].weight.noalias() = delta * cache.activations[k].transpose();
    g.layers[k].bias = delta.rowwise().sum();
    if (k > 0) delta = layers_[k].weight.transpose() * delta;
  }
  return g;
}

Gradients Network::zero_gradients() const {
  Gradients g;
  for (const auto& l : layers_)
    g.layers.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                        Eigen::VectorXd::Zero(l.bias.size())});
  return g;
}

Eigen::VectorXd Network::flat_parameters() const {
  Gradients view{layers_};
  return view.flatten();
}

void Network::set_flat_parameters(const Eigen::VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != parameter_count())
    throw ContractError("set_flat_parameters: size mismatch");
  Eigen::Index at = 0;
  for (auto& l : layers_) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = flat[at++];
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias[r] = flat[at++];
  }
}

void Network::clip_parameters(double bound) {
  for (auto& l : layers_) {
    l.weight = l.weight.cwiseMax(-bound).cwiseMin(bound);
    l.bias = l.bias.cwiseMax(-bound).cwiseMin(bound);
  }
}

double Network::max_abs_parameter() const {
  double m = 0.0;
  for (const auto& l : layers_) {
    if (l.weight.size() > 0) m = std::max(m, l.weight.cwiseAbs().maxCoeff());
    if (l.bias.size() > 0) m = std::max(m, l.bias.cwiseAbs().maxCoeff());
  }
  return m;
}

bool Network::all_finite() const {
  for (const auto& l : layers_)
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  return true;
}

void Network::save(std::ostream& out) const {
  out << "mlp v1 " << layers_.size() << ' ' << activation_name(hidden_) << ' '
      << activation_name(output_) << '\n';
  out << input_dim();
  for (const auto& l : layers_) out << ' ' << l.weight.rows();
  out << '\n' << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& l : layers_) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) out << (c ? " " : "") << l.weight(r, c);
      out << '\n';
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) out << (r ? " " : "") << l.bias[r];
    out << '\n';
  }
}

Network Network::load(std::istream& in) {
  std::string magic, version, hidden, output;
  std::size_t n_layers = 0;
  if (!(in >> magic >> version >> n_layers >> hidden >> output) || magic != "mlp" || version != "v1")
    throw ContractError("not an mlp v1 network stream");
  std::vector<int> dims(n_layers + 1);
  for (auto& d : dims)
    if (!(in >> d) || d <= 0) throw ContractError("bad layer dims in network stream");
  std::vector<Layer> layers;
  for (std::size_t i = 0; i < n_layers; ++i) {
    Layer l{Eigen::MatrixXd(dims[i + 1], dims[i]), Eigen::VectorXd(dims[i + 1])};
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c)
        if (!(in >> l.weight(r, c))) throw ContractError("truncated network weights");
    for (Eigen::Index r = 0; r < l.bias.size(); ++r)
      if (!(in >> l.bias[r])) throw ContractError("truncated network biases");
    layers.push_back(std::move(l));
  }
  return Network(std::move(layers), parse_activation(hidden), parse_activation(output));
}

bool operator==(const Network& a, const Network& b) {
  if (a.hidden_ != b.hidden_ || a.output_ != b.output_ || a.layers_.size() != b.layers_.size())
    return false;
  for (std::size_t i = 0; i < a.layers_.size(); ++i) {
    const auto& la = a.layers_[i];
    const auto& lb = b.layers_[i];
    if (la.weight.rows() != lb.weight.rows() || la.weight.cols() != lb.weight.cols()) return false;
    if (la.weight != lb.weight || la.bias != lb.bias) return false;
  }
  return true;
}

Evaluated gradients(const Network& net, const Eigen::MatrixXd& inputs, const OutputLoss& loss) {
  ForwardCache cache;
  const Eigen::MatrixXd out = net.forward_batch(inputs, cache);
  LossAndOutputGrad lg = loss(out);
  if (!std::isfinite(lg.loss)) throw NumericError("non-finite loss", lg.loss);
  return {lg.loss, net.backward(cache, lg.output_grad)};
}

Optimizer::Optimizer(OptimizerKind kind, double learning_rate, std::size_t parameter_count)
    : kind_(kind),
      lr_(learning_rate),
      first_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(parameter_count))),
      second_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(parameter_count))) {
  if (!(learning_rate > 0.0)) throw ContractError("learning rate must be positive");
}

void Optimizer::step(Eigen::VectorXd& params, const Eigen::VectorXd& grads) {
  if (params.size() != second_.size() || grads.size() != second_.size())
    throw ContractError("optimizer: parameter/gradient size does not match accumulators");
  ++t_;
  if (kind_ == OptimizerKind::adam) {
    first_ = kAdamBeta1 * first_ + (1.0 - kAdamBeta1) * grads;
    second_ = kAdamBeta2 * second_ + (1.0 - kAdamBeta2) * grads.cwiseAbs2();
    const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(t_));
    params.array() -= lr_ * (first_.array() / c1) / ((second_.array() / c2).sqrt() + kEps);
  } else {
    second_ = kRmsDecay * second_ + (1.0 - kRmsDecay) * grads.cwiseAbs2();
    params.array() -= lr_ * grads.array() / (second_.array().sqrt() + kEps);
  }
}

void Optimizer::step(Network& net, const Gradients& grads) {
  Eigen::VectorXd flat = net.flat_parameters();
  step(flat, grads.flatten());
  net.set_flat_parameters(flat);
}

void save_network(const Network& net, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ContractError("cannot write " + path.string());
  net.save(out);
}

Network load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot read " + path.string());
  return Network::load(in);
}

}  // namespace i2l::nn
