#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include "i2l/errors.hpp"
#include "internal.hpp"

namespace i2l::trainers {

namespace {

constexpr std::array<std::pair<Algorithm, const char*>, 6> kAlgorithmNames{{
    {Algorithm::i2l, "i2l"},
    {Algorithm::gail_s, "gail_s"},
    {Algorithm::gaifo, "gaifo"},
    {Algorithm::gail_sa, "gail_sa"},
    {Algorithm::airl, "airl"},
    {Algorithm::bco, "bco"},
}};

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  return std::stod(s);
}

}  // namespace

std::string to_string(Algorithm algo) {
  for (const auto& [a, name] : kAlgorithmNames)
    if (a == algo) return name;
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  std::string valid;
  for (const auto& [a, n] : kAlgorithmNames) {
    if (name == n) return a;
    valid += valid.empty() ? n : std::string("|") + n;
  }
  throw ContractError("unknown algorithm '" + name + "' (valid: " + valid + ")");
}

bool needs_demo_actions(Algorithm algo) { return algo == Algorithm::gail_sa || algo == Algorithm::airl; }

TrainConfig TrainConfig::for_algorithm(Algorithm algo) {
  TrainConfig c;
  c.algorithm = algo;
  if (algo == Algorithm::i2l) {
    c.disc_steps = kI2lDiscSteps;
    c.disc_lr = kI2lDiscLearningRate;
    c.ppo.learning_rate = kI2lPpoLearningRate;
  }
  return c;
}

void TrainConfig::validate() const {
  env.validate();
  dynamics.validate();
  if (total_steps <= 0) throw ContractError("total env steps must be > 0");
  if (buffer_capacity < 1) throw ContractError("buffer capacity must be >= 1");
  if (steps_per_iter < env.episode_length) throw ContractError("steps per iteration < episode length");
  if (norm_random_episodes < 0) throw ContractError("norm_random_episodes must be >= 0");
  if (eval_episodes <= 0) throw ContractError("eval episodes must be > 0");
  if (demo_path.empty()) throw PreconditionError("imitation needs a demo file");
  if (!std::filesystem::exists(demo_path)) throw PreconditionError("demo file not found: " + demo_path.string());
}

std::string format_metrics_row(const IterationMetrics& m) {
  std::ostringstream os;
  os << m.iter << ',' << m.steps << ',' << format_double(m.mean_return) << ',' << format_double(m.w1) << ','
     << format_double(m.buffer_score) << ',' << format_double(m.disc_loss) << ',' << format_double(m.critic_obj)
     << ',' << format_double(m.entropy);
  return os.str();
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<IterationMetrics>& rows) {
  std::ofstream out(path);
  if (!out) throw ContractError("cannot write " + path.string());
  out << kMetricsHeader << '\n';
  for (const auto& r : rows) out << format_metrics_row(r) << '\n';
}

std::vector<IterationMetrics> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot read metrics " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) throw ContractError("bad metrics header in " + path.string());
  std::vector<IterationMetrics> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 8) throw ContractError("bad metrics row: " + line);
    rows.push_back({std::stoi(f[0]), std::stol(f[1]), parse_double(f[2]), parse_double(f[3]), parse_double(f[4]),
                    parse_double(f[5]), parse_double(f[6]), parse_double(f[7])});
  }
  return rows;
}

std::vector<std::uint64_t> eval_seeds(std::uint64_t seed, int count) {
  std::vector<std::uint64_t> s;
  for (int k = 0; k < count; ++k) s.push_back(derive_seed(derive_seed(seed, 0xE7A1), static_cast<std::uint64_t>(k)));
  return s;
}

double random_policy_return(const envs::EnvSpec& spec, const envs::DynamicsConfig& dynamics,
                            const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw ContractError("random_policy_return: no seeds");
  double total = 0.0;
  for (auto s : seeds) total += envs::episode_return(rollout::random_episode(spec, dynamics, s));
  return total / static_cast<double>(seeds.size());
}

double normalized_score(double value, double floor, double reference) {
  return (value - floor) / (reference - floor);
}

adversary::DiscInput transition_pairs(const Eigen::MatrixXd& states, int episode_length) {
  const auto episodes = rollout::split_episodes(states, episode_length);
  Eigen::Index n = 0;
  for (const auto& e : episodes) n += std::max<Eigen::Index>(0, e.cols() - 1);
  adversary::DiscInput out{Eigen::MatrixXd(states.rows(), n), Eigen::MatrixXd(states.rows(), n), std::nullopt};
  Eigen::Index at = 0;
  for (const auto& e : episodes) {
    const Eigen::Index m = e.cols() - 1;
    if (m <= 0) continue;
    out.states.middleCols(at, m) = e.leftCols(m);
    out.next_states->middleCols(at, m) = e.rightCols(m);
    at += m;
  }
  return out;
}

namespace {

void save_normalized_net(std::ostream& out, const nn::Network& net, const StateNormalizer& norm) {
  net.save(out);
  norm.save(out);
}

}  // namespace

void save_airl(const adversary::AirlDiscriminator& disc, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ContractError("cannot write " + path.string());
  save_normalized_net(out, disc.f, disc.normalizer);
}

adversary::AirlDiscriminator load_airl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot read discriminator " + path.string());
  adversary::AirlDiscriminator d;
  d.f = nn::Network::load(in);
  d.normalizer = StateNormalizer::load(in);
  d.optimizer = nn::Optimizer::adam(adversary::kDiscLearningRate, d.f.parameter_count());
  return d;
}

void save_critic(const wcritic::WassersteinCritic& critic, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ContractError("cannot write " + path.string());
  save_normalized_net(out, critic.g, critic.normalizer);
  out << "clip_bound " << std::setprecision(std::numeric_limits<double>::max_digits10) << critic.clip_bound << '\n';
}

wcritic::WassersteinCritic load_critic(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot read critic " + path.string());
  wcritic::WassersteinCritic c;
  c.g = nn::Network::load(in);
  c.normalizer = StateNormalizer::load(in);
  std::string tag;
  if (!(in >> tag >> c.clip_bound) || tag != "clip_bound") throw ContractError("critic checkpoint: no clip_bound");
  c.optimizer = nn::Optimizer::rmsprop(wcritic::kCriticLearningRate, c.g.parameter_count());
  return c;
}

std::vector<std::pair<int, std::filesystem::path>> list_snapshots(const std::filesystem::path& run_dir) {
  std::vector<std::pair<int, std::filesystem::path>> out;
  const auto dir = run_dir / "snapshots";
  if (!std::filesystem::is_directory(dir)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("buffer_", 0) != 0 || entry.path().extension() != ".ckpt") continue;
    out.emplace_back(std::stoi(name.substr(7)), entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

TrainResult train(const TrainConfig& config) {
  switch (config.algorithm) {
    case Algorithm::i2l: return i2l_train(config);
    case Algorithm::bco: return bco_train(config);
    default: return baseline_train(config);
  }
}

namespace detail {

void RewardScaler::apply(std::vector<Trajectory>& trajectories) {
  // Welford-style merge of this batch's discounted-return statistics.
  std::vector<double> returns;
  for (const auto& tr : trajectories) {
    double ret = 0.0;
    for (Eigen::Index t = 0; t < tr.rewards->size(); ++t) {
      ret = gamma_ * ret + (*tr.rewards)[t];
      returns.push_back(ret);
    }
  }
  if (!returns.empty()) {
    const double n = static_cast<double>(returns.size());
    double bm = 0.0;
    for (double r : returns) bm += r;
    bm /= n;
    double bv = 0.0;
    for (double r : returns) bv += (r - bm) * (r - bm);
    bv /= n;
    const double delta = bm - mean_;
    const double total = count_ + n;
    mean_ += delta * n / total;
    var_ = (var_ * count_ + bv * n + delta * delta * count_ * n / total) / total;
    count_ = total;
  }
  const double s = scale();
  for (auto& tr : trajectories) *tr.rewards /= s;
}

double RewardScaler::scale() const { return std::sqrt(var_ + 1e-8); }

PpoAgent::PpoAgent(int state_dim, int action_dim, int width, const policy::PpoConfig& ppo, double gamma,
                   double lambda, bool normalize_advantages, bool scale, Rng& init_rng)
    : policy(policy::GaussianPolicy::create(state_dim, action_dim, init_rng, width)),
      value_fn(policy::ValueFunction::create(state_dim, init_rng, width)),
      learner(policy, value_fn, ppo),
      scaler(gamma),
      batch_options{gamma, lambda, normalize_advantages},
      scale_rewards(scale) {}

policy::PpoStats PpoAgent::update(std::vector<Trajectory>& trajectories, Rng& rng) {
  if (scale_rewards) scaler.apply(trajectories);
  const RolloutBatch batch = rollout::build_batch(trajectories, batch_options);
  return learner.update(policy, value_fn, batch, rng);
}

RunSeeds run_seeds(std::uint64_t seed) {
  return {derive_seed(seed, 11), derive_seed(seed, 12), derive_seed(seed, 13), derive_seed(seed, 14)};
}

StateNormalizer fit_input_normalizer(const TrainConfig& config, const Eigen::MatrixXd& demo_states) {
  if (config.norm_random_episodes <= 0) return StateNormalizer::fit(demo_states);
  std::vector<Trajectory> pool;
  const std::uint64_t base = derive_seed(config.seed, 15);
  for (int k = 0; k < config.norm_random_episodes; ++k)
    pool.push_back(rollout::random_episode(config.env, config.dynamics, derive_seed(base, static_cast<std::uint64_t>(k))));
  const Eigen::MatrixXd random_states = concat_states(pool);
  Eigen::MatrixXd all(demo_states.rows(), demo_states.cols() + random_states.cols());
  all << demo_states, random_states;
  return StateNormalizer::fit(all);
}

Eigen::MatrixXd concat_states(const std::vector<Trajectory>& trajectories) {
  Eigen::Index n = 0;
  for (const auto& t : trajectories) n += t.length();
  if (trajectories.empty()) return {};
  Eigen::MatrixXd out(trajectories.front().states.rows(), n);
  Eigen::Index at = 0;
  for (const auto& t : trajectories) {
    out.middleCols(at, t.length()) = t.states;
    at += t.length();
  }
  return out;
}

adversary::PairBatch concat_pairs(const std::vector<Trajectory>& trajectories) {
  adversary::PairBatch out;
  out.states = concat_states(trajectories);
  if (trajectories.empty()) return out;
  out.actions.resize(trajectories.front().actions->rows(), out.states.cols());
  Eigen::Index at = 0;
  for (const auto& t : trajectories) {
    out.actions.middleCols(at, t.length()) = *t.actions;
    at += t.length();
  }
  return out;
}

Eigen::MatrixXd subsample_columns(const Eigen::MatrixXd& m, int max_cols, std::uint64_t seed) {
  if (m.cols() <= max_cols) return m;
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(m.cols()));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<Eigen::Index>(i);
  Rng rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  Eigen::MatrixXd out(m.rows(), max_cols);
  for (int i = 0; i < max_cols; ++i) out.col(i) = m.col(idx[static_cast<std::size_t>(i)]);
  return out;
}

void ensure_dir(const std::filesystem::path& dir) {
  if (!dir.empty()) std::filesystem::create_directories(dir);
}

void record_failure(const TrainConfig& config, int iteration, const std::string& what) {
  if (config.run_dir.empty()) return;
  ensure_dir(config.run_dir);
  std::ofstream out(config.run_dir / "failure.txt");
  out << "algorithm=" << to_string(config.algorithm) << "\niteration=" << iteration << "\nerror=" << what << '\n';
}

}  // namespace detail
}  // namespace i2l::trainers
