#include "i2l/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include "i2l/errors.hpp"
#include "i2l/trainers.hpp"

namespace i2l::cli {

namespace fs = std::filesystem;
using trainers::Algorithm;

namespace {

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

std::string fmt(double v) {
  std::ostringstream out;
  out << std::setprecision(10) << v;
  return out.str();
}

// Round-trips exactly; used where a value is read back.
std::string fmt_exact(double v) {
  std::ostringstream out;
  out << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return out.str();
}

// Options shared by the subcommands that pick an environment variant.
struct EnvFlags {
  std::string env;
  envs::DynamicsConfig dynamics;

  void add(CLI::App* app, bool required) {
    auto* opt = app->add_option("--env", env, "pointmass2d | pendulum");
    if (required) opt->required();
    app->add_option("--gravity-scale,--gravity_scale", dynamics.gravity_scale, "gravity multiplier");
    app->add_option("--mass-scale,--mass_scale", dynamics.mass_scale, "mass (density) multiplier");
    app->add_option("--friction-scale,--friction_scale", dynamics.friction_scale, "friction multiplier");
  }
};

std::map<std::string, std::string> train_manifest(const std::string& name, const trainers::TrainConfig& c) {
  return {{"name", name},
          {"version", I2L_VERSION},
          {"algorithm", trainers::to_string(c.algorithm)},
          {"env", envs::to_string(c.env.kind)},
          {"gravity_scale", fmt(c.dynamics.gravity_scale)},
          {"mass_scale", fmt(c.dynamics.mass_scale)},
          {"friction_scale", fmt(c.dynamics.friction_scale)},
          {"demo", c.demo_path.string()},
          {"steps", std::to_string(c.total_steps)},
          {"steps_per_iter", std::to_string(c.steps_per_iter)},
          {"seed", std::to_string(c.seed)},
          {"buffer_capacity", std::to_string(c.buffer_capacity)},
          {"snapshot_every", std::to_string(c.snapshot_every)},
          {"ppo_lr", fmt(c.ppo.learning_rate)},
          {"disc_steps", std::to_string(c.disc_steps)},
          {"disc_lr", fmt(c.disc_lr)},
          {"log_pi_weight", fmt(c.log_pi_weight)},
          {"norm_random_episodes", std::to_string(c.norm_random_episodes)},
          {"started", timestamp()}};
}

// One imitation run into config.run_dir; writes manifest.txt and final.txt.
double run_imitation(const std::string& name, const trainers::TrainConfig& config) {
  std::error_code ec;
  fs::remove(config.run_dir / "final.txt", ec);
  fs::remove(config.run_dir / "failure.txt", ec);
  fs::create_directories(config.run_dir);
  auto manifest = train_manifest(name, config);
  manifest["status"] = "running";
  write_key_values(config.run_dir / "manifest.txt", manifest);
  const auto result = trainers::train(config);
  manifest["status"] = "done";
  manifest["finished"] = timestamp();
  manifest["final_return"] = fmt(result.final_return);
  write_key_values(config.run_dir / "manifest.txt", manifest);
  std::ofstream(config.run_dir / "final.txt") << fmt_exact(result.final_return) << '\n';
  return result.final_return;
}

struct ImitateFlags {
  EnvFlags env;
  std::string algo;
  std::string demo;
  std::string name;
  std::uint64_t seed = 0;
  long steps = 300000;
  int steps_per_iter = 2000;
  std::size_t buffer_capacity = 5;
  int snapshot_every = 10;
  // Unset means the algorithm's default.
  std::optional<double> ppo_lr, disc_lr;
  std::optional<int> disc_steps;
  trainers::TrainConfig defaults;

  void add(CLI::App* app) {
    env.add(app, true);
    app->add_option("--algo", algo, "i2l | gail_s | gaifo | gail_sa | airl | bco")->required();
    app->add_option("--demo", demo, "demo file (demo-sa format for gail_sa / airl)")->required();
    app->add_option("--name", name, "run name under the output root");
    app->add_option("--seed", seed, "run seed");
    app->add_option("--steps", steps, "total environment steps");
    app->add_option("--steps-per-iter,--steps_per_iter", steps_per_iter, "environment steps per iteration");
    app->add_option("--buffer-capacity,--buffer_capacity", buffer_capacity, "priority buffer size K");
    app->add_option("--snapshot-every,--snapshot_every", snapshot_every, "buffer snapshot period; 0 disables");
    app->add_option("--ppo-lr,--ppo_lr", ppo_lr, "policy learning rate");
    app->add_option("--disc-steps,--disc_steps", disc_steps, "discriminator updates per iteration");
    app->add_option("--disc-lr,--disc_lr", disc_lr, "discriminator learning rate");
    app->add_option("--critic-steps,--critic_steps", defaults.critic_steps, "critic updates per iteration");
    app->add_option("--critic-lr,--critic_lr", defaults.critic_lr, "critic learning rate");
    app->add_option("--clip-bound,--clip_bound", defaults.clip_bound, "critic weight clip");
    app->add_option("--entropy-coef,--entropy_coef", defaults.ppo.entropy_coef, "entropy bonus weight");
    app->add_option("--log-pi-weight,--log_pi_weight", defaults.log_pi_weight, "weight of -log pi in the adversarial reward");
    app->add_option("--norm-random-episodes,--norm_random_episodes", defaults.norm_random_episodes,
                    "random episodes pooled with the demo for input normalization");
  }

  trainers::TrainConfig config() const {
    trainers::TrainConfig c = defaults;
    c.algorithm = trainers::parse_algorithm(algo);
    const auto tuned = trainers::TrainConfig::for_algorithm(c.algorithm);
    c.ppo.learning_rate = ppo_lr.value_or(tuned.ppo.learning_rate);
    c.disc_steps = disc_steps.value_or(tuned.disc_steps);
    c.disc_lr = disc_lr.value_or(tuned.disc_lr);
    c.env = envs::EnvSpec::make(envs::parse_env_kind(env.env));
    c.dynamics = env.dynamics;
    c.demo_path = demo;
    c.seed = seed;
    c.total_steps = steps;
    c.steps_per_iter = steps_per_iter;
    c.buffer_capacity = buffer_capacity;
    c.snapshot_every = snapshot_every;
    return c;
  }

  std::string default_name(const trainers::TrainConfig& c) const {
    std::string n = trainers::to_string(c.algorithm) + "-" + envs::to_string(c.env.kind) + "-" +
                    setting_label(c.dynamics);
    if (c.algorithm == Algorithm::i2l) n += "-K" + std::to_string(c.buffer_capacity);
    return n + "-s" + std::to_string(c.seed);
  }
};

int cmd_expert(const EnvFlags& env, std::uint64_t seed, long steps, double lr, const std::string& name_flag) {
  trainers::ExpertConfig c;
  c.ppo.learning_rate = lr;
  c.env = envs::EnvSpec::make(envs::parse_env_kind(env.env));
  c.dynamics = env.dynamics;
  c.seed = seed;
  c.steps = steps;
  const std::string name =
      name_flag.empty() ? "expert-" + envs::to_string(c.env.kind) + "-" + setting_label(c.dynamics) + "-s" +
                              std::to_string(seed)
                        : name_flag;
  const fs::path dir = output_root() / name;
  fs::create_directories(dir);
  std::map<std::string, std::string> manifest{{"name", name},
                                              {"version", I2L_VERSION},
                                              {"algorithm", "expert"},
                                              {"env", envs::to_string(c.env.kind)},
                                              {"gravity_scale", fmt(c.dynamics.gravity_scale)},
                                              {"mass_scale", fmt(c.dynamics.mass_scale)},
                                              {"friction_scale", fmt(c.dynamics.friction_scale)},
                                              {"steps", std::to_string(steps)},
                                              {"seed", std::to_string(seed)},
                                              {"started", timestamp()}};
  const auto result = trainers::train_expert(c);
  rollout::save_demo(result.demo, dir / "demo.txt");
  rollout::save_demo(result.demo_sa, dir / "demo_sa.txt");
  policy::save_policy(result.policy, dir / "policy.ckpt");
  trainers::write_metrics_csv(dir / "metrics.csv", result.metrics);
  manifest["finished"] = timestamp();
  manifest["eval_return"] = fmt(result.eval_return);
  write_key_values(dir / "manifest.txt", manifest);
  std::cout << "expert env=" << envs::to_string(c.env.kind) << " setting=" << setting_label(c.dynamics)
            << " return=" << fmt(result.eval_return) << " demo=" << (dir / "demo.txt").string() << '\n';
  return kExitOk;
}

int cmd_imitate(const ImitateFlags& flags) {
  auto c = flags.config();
  const std::string name = flags.name.empty() ? flags.default_name(c) : flags.name;
  c.run_dir = output_root() / name;
  const double final_return = run_imitation(name, c);
  std::cout << "imitate algo=" << trainers::to_string(c.algorithm) << " run=" << c.run_dir.string()
            << " final_return=" << fmt(final_return) << '\n';
  return kExitOk;
}

int cmd_measure(const fs::path& run_dir, const fs::path& oracle_path, int oracle_episodes, int critic_steps,
                int window, std::uint64_t seed) {
  if (!fs::exists(run_dir / "manifest.txt")) throw PreconditionError("measure: no manifest.txt in " + run_dir.string());
  const auto manifest = read_key_values(run_dir / "manifest.txt");
  auto get = [&](const std::string& key) {
    auto it = manifest.find(key);
    if (it == manifest.end()) throw PreconditionError("measure: manifest lacks " + key);
    return it->second;
  };
  if (get("algorithm") != "i2l") throw PreconditionError("measure: run is not an i2l run");
  const auto spec = envs::EnvSpec::make(envs::parse_env_kind(get("env")));
  envs::DynamicsConfig dyn{std::stod(get("gravity_scale")), std::stod(get("mass_scale")),
                           std::stod(get("friction_scale"))};

  const auto snapshot_files = trainers::list_snapshots(run_dir);
  if (snapshot_files.empty())
    throw PreconditionError("measure: no buffer snapshots under " + (run_dir / "snapshots").string() +
                            "; rerun imitate with --snapshot-every > 0");
  const auto metrics = trainers::read_metrics_csv(run_dir / "metrics.csv");

  trainers::GapInputs in{{}, trainers::load_airl(run_dir / "disc.ckpt"), {}, critic_steps};
  in.seed = seed;
  for (const auto& [iter, path] : snapshot_files) in.snapshots.emplace_back(iter, buffer::load_buffer(path));

  // Oracle (s, a) tuples: deterministic episodes of the in-env expert.
  const auto oracle = policy::load_policy(oracle_path);
  std::vector<Trajectory> episodes;
  const auto seeds = trainers::eval_seeds(derive_seed(seed, 0x0AC1E), oracle_episodes);
  for (auto s : seeds) episodes.push_back(rollout::run_episode(oracle, spec, dyn, s, true));
  Eigen::Index n = 0;
  for (const auto& e : episodes) n += e.length();
  in.oracle_pairs.states.resize(spec.state_dim, n);
  in.oracle_pairs.actions.resize(spec.action_dim, n);
  Eigen::Index at = 0;
  for (const auto& e : episodes) {
    in.oracle_pairs.states.middleCols(at, e.length()) = e.states;
    in.oracle_pairs.actions.middleCols(at, e.length()) = *e.actions;
    at += e.length();
  }

  const auto rows = trainers::measure_lower_bound_gap(in);
  {
    std::ofstream out(run_dir / "gap.csv");
    out << "iter,lhs,rhs_L0.5,rhs_L1.0,rhs_L1.5\n";
    for (const auto& r : rows) out << r.iter << ',' << fmt(r.lhs) << ',' << fmt(r.rhs[0]) << ',' << fmt(r.rhs[1]) << ','
                                   << fmt(r.rhs[2]) << '\n';
  }
  std::cout << "gap first_iter=" << rows.front().iter << " gap_L1.0=" << fmt(rows.front().gap(1))
            << " last_iter=" << rows.back().iter << " gap_L1.0=" << fmt(rows.back().gap(1)) << '\n';

  const auto trend = trainers::measure_w1_trend(metrics, window);
  {
    std::ofstream out(run_dir / "w1_trend.csv");
    out << "initial_mean,final_mean,decreased\n"
        << fmt(trend.initial_mean) << ',' << fmt(trend.final_mean) << ',' << (trend.decreased ? "true" : "false")
        << '\n';
  }
  std::cout << "w1_trend initial=" << fmt(trend.initial_mean) << " final=" << fmt(trend.final_mean)
            << " decreased=" << (trend.decreased ? "true" : "false") << '\n';
  return kExitOk;
}

struct MatrixFlags {
  std::string env;
  std::vector<std::string> algos{"i2l", "gail_s"};
  std::vector<std::string> settings{"default"};
  std::string demo;
  std::string demo_sa;
  std::string name = "matrix";
  int seeds = 8;
  std::uint64_t base_seed = 0;
  long steps = 300000;
  int steps_per_iter = 2000;
  std::size_t buffer_capacity = 5;
  bool resume = false;
};

int cmd_matrix(const MatrixFlags& f) {
  if (f.seeds <= 0) throw ContractError("matrix: --seeds must be > 0");
  std::vector<Algorithm> algos;
  for (const auto& a : f.algos) algos.push_back(trainers::parse_algorithm(a));
  std::vector<envs::DynamicsConfig> settings;
  for (const auto& s : f.settings) settings.push_back(parse_setting(s));
  const auto spec = envs::EnvSpec::make(envs::parse_env_kind(f.env));
  const fs::path root = output_root() / f.name;

  std::vector<CellSummary> summary;
  bool any_failed = false;
  for (Algorithm algo : algos) {
    for (const auto& dyn : settings) {
      CellSummary cell{trainers::to_string(algo), setting_label(dyn)};
      std::vector<double> finals;
      for (int k = 0; k < f.seeds; ++k) {
        auto c = trainers::TrainConfig::for_algorithm(algo);
        c.env = spec;
        c.dynamics = dyn;
        c.demo_path = trainers::needs_demo_actions(algo) && !f.demo_sa.empty() ? f.demo_sa : f.demo;
        c.seed = f.base_seed + static_cast<std::uint64_t>(k);
        c.total_steps = f.steps;
        c.steps_per_iter = f.steps_per_iter;
        c.buffer_capacity = f.buffer_capacity;
        c.run_dir = root / cell.algorithm / cell.setting / ("s" + std::to_string(c.seed));
        const fs::path done = c.run_dir / "final.txt";
        if (f.resume && fs::exists(done)) {
          double v = 0.0;
          std::ifstream(done) >> v;
          finals.push_back(v);
          std::cout << "skip " << c.run_dir.string() << '\n';
          continue;
        }
        try {
          finals.push_back(run_imitation(f.name, c));
          std::cout << "done " << c.run_dir.string() << " final_return=" << fmt(finals.back()) << '\n';
        } catch (const std::exception& e) {
          ++cell.failed;
          any_failed = true;
          fs::create_directories(c.run_dir);
          std::ofstream(c.run_dir / "failure.txt", std::ios::app) << "error=" << e.what() << '\n';
          std::cerr << "failed " << c.run_dir.string() << ": " << e.what() << '\n';
        }
      }
      cell.completed = static_cast<int>(finals.size());
      if (!finals.empty()) {
        for (double v : finals) cell.mean += v;
        cell.mean /= static_cast<double>(finals.size());
        for (double v : finals) cell.stddev += (v - cell.mean) * (v - cell.mean);
        cell.stddev = std::sqrt(cell.stddev / static_cast<double>(finals.size()));
      }
      summary.push_back(cell);
    }
  }
  write_summary_csv(root / "summary.csv", summary);
  std::cout << "matrix summary=" << (root / "summary.csv").string() << '\n';
  return any_failed ? kExitFailure : kExitOk;
}

}  // namespace

fs::path output_root() {
  const char* env = std::getenv("I2L_RUN_DIR");
  return env && *env ? fs::path(env) : fs::path("run");
}

envs::DynamicsConfig parse_setting(const std::string& text) {
  envs::DynamicsConfig c;
  if (text == "default" || text.empty()) return c;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ContractError("setting: expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument("trailing");
    } catch (const std::logic_error&) {
      throw ContractError("setting: bad number in '" + item + "'");
    }
    if (key == "gravity") c.gravity_scale = value;
    else if (key == "mass") c.mass_scale = value;
    else if (key == "friction") c.friction_scale = value;
    else throw ContractError("setting: unknown key '" + key + "' (gravity, mass, friction)");
  }
  c.validate();
  return c;
}

std::string setting_label(const envs::DynamicsConfig& c) {
  if (c.is_default()) return "default";
  std::string out;
  auto add = [&](const char* key, double v) {
    if (v == 1.0) return;
    if (!out.empty()) out += ',';
    out += key;
    out += '=' + fmt(v);
  };
  add("gravity", c.gravity_scale);
  add("mass", c.mass_scale);
  add("friction", c.friction_scale);
  return out;
}

std::map<std::string, std::string> read_key_values(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot read " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw PreconditionError(path.string() + ": expected key=value, got '" + line + "'");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

void write_key_values(const fs::path& path, const std::map<std::string, std::string>& values) {
  std::ofstream out(path);
  for (const auto& [k, v] : values) out << k << '=' << v << '\n';
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

void write_summary_csv(const fs::path& path, const std::vector<CellSummary>& rows) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  out << "algo,setting,n,mean,std,failed\n";
  // Settings may contain commas, so they are quoted.
  for (const auto& r : rows)
    out << r.algorithm << ",\"" << r.setting << "\"," << r.completed << ',' << fmt(r.mean) << ',' << fmt(r.stddev)
        << ',' << r.failed << '\n';
}

namespace {

std::string flag_key(std::string s) {
  std::replace(s.begin(), s.end(), '_', '-');
  return s;
}

// Appends "--key=value" for each entry of a --config file whose flag is not
// already on the command line.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  fs::path path;
  std::vector<std::string> given;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0) continue;
    const std::string name = flag_key(a.substr(2, a.find('=') - 2));
    given.push_back(name);
    if (name != "config") continue;
    if (a.find('=') != std::string::npos) path = a.substr(a.find('=') + 1);
    else if (i + 1 < args.size()) path = args[i + 1];
  }
  if (path.empty()) return args;
  std::vector<std::string> out = args;
  for (const auto& [key, value] : read_key_values(path))
    if (std::find(given.begin(), given.end(), flag_key(key)) == given.end()) out.push_back("--" + key + "=" + value);
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  std::vector<std::string> expanded;
  try {
    expanded = expand_config(args);
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  std::string config_path;
  CLI::App app{"I2L: state-only imitation under dynamics mismatch"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(I2L_VERSION));

  EnvFlags expert_env;
  std::uint64_t expert_seed = 0;
  long expert_steps = 300000;
  std::string expert_name;
  auto* expert = app.add_subcommand("expert", "train a PPO expert on true rewards and write demos");
  expert->add_option("--config", config_path, "key=value file; command-line flags take precedence");
  expert_env.add(expert, true);
  expert->add_option("--seed", expert_seed, "run seed");
  expert->add_option("--steps", expert_steps, "total environment steps");
  expert->add_option("--name", expert_name, "run name under the output root");
  double expert_lr = trainers::ExpertConfig{}.ppo.learning_rate;
  expert->add_option("--ppo-lr,--ppo_lr", expert_lr, "policy learning rate");

  ImitateFlags imitate_flags;
  auto* imitate = app.add_subcommand("imitate", "run an imitation algorithm against a demo");
  imitate->add_option("--config", config_path, "key=value file; command-line flags take precedence");
  imitate_flags.add(imitate);

  std::string measure_run, measure_oracle;
  int oracle_episodes = 5, critic_steps = trainers::kMeasureCriticSteps, window = 10;
  std::uint64_t measure_seed = 0;
  auto* measure = app.add_subcommand("measure", "lower-bound gap and W1 trend of a finished i2l run");
  measure->add_option("--config", config_path, "key=value file; command-line flags take precedence");
  measure->add_option("--run", measure_run, "i2l run directory")->required();
  measure->add_option("--oracle", measure_oracle, "policy.ckpt of an expert trained in the imitator env")->required();
  measure->add_option("--oracle-episodes,--oracle_episodes", oracle_episodes, "oracle episodes for the gap estimate");
  measure->add_option("--critic-steps,--critic_steps", critic_steps, "critic fits per snapshot");
  measure->add_option("--window", window, "moving-average window for the W1 trend");
  measure->add_option("--seed", measure_seed, "measurement seed");

  MatrixFlags mf;
  auto* matrix = app.add_subcommand("matrix", "algorithms x dynamics settings x seeds, summarised");
  matrix->add_option("--config", config_path, "key=value file; command-line flags take precedence");
  matrix->add_option("--env", mf.env, "pointmass2d | pendulum")->required();
  matrix->add_option("--algos", mf.algos, "algorithms to run")->delimiter(' ');
  matrix->add_option("--settings", mf.settings, "e.g. default 'gravity=0.5' 'mass=2,friction=3'")->delimiter(' ');
  matrix->add_option("--demo", mf.demo, "state-only demo")->required();
  matrix->add_option("--demo-sa,--demo_sa", mf.demo_sa, "action-augmented demo for gail_sa / airl");
  matrix->add_option("--name", mf.name, "matrix name under the output root");
  matrix->add_option("--seeds", mf.seeds, "seeds per cell");
  matrix->add_option("--seed", mf.base_seed, "first seed");
  matrix->add_option("--steps", mf.steps, "total environment steps per run");
  matrix->add_option("--steps-per-iter,--steps_per_iter", mf.steps_per_iter, "environment steps per iteration");
  matrix->add_option("--buffer-capacity,--buffer_capacity", mf.buffer_capacity, "priority buffer size K");
  matrix->add_flag("--resume", mf.resume, "skip cells whose final.txt exists");

  try {
    std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*expert) return cmd_expert(expert_env, expert_seed, expert_steps, expert_lr, expert_name);
    if (*imitate) return cmd_imitate(imitate_flags);
    if (*measure) return cmd_measure(measure_run, measure_oracle, oracle_episodes, critic_steps, window, measure_seed);
    if (*matrix) return cmd_matrix(mf);
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ContractError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace i2l::cli
