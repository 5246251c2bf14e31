#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "i2l/cli.hpp"
#include "i2l/errors.hpp"
#include "i2l/rollout.hpp"
#include "i2l/trainers.hpp"
#include "support.hpp"

using namespace i2l;
namespace fs = std::filesystem;
using testing_support::scratch_dir;

namespace {

struct Outcome {
  int code = -1;
  std::string output;  // stdout and stderr
};

// Runs the i2l binary with the given arguments and output root.
Outcome run_cli(const std::string& args, const fs::path& root) {
  const char* bin = std::getenv("I2L_BIN");
  if (!bin) bin = "i2l";
  const std::string cmd = "I2L_RUN_DIR='" + root.string() + "' '" + bin + "' " + args + " 2>&1";
  Outcome o;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return o;
  std::array<char, 512> chunk{};
  while (fgets(chunk.data(), static_cast<int>(chunk.size()), pipe)) o.output += chunk.data();
  const int status = pclose(pipe);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path random_demo(const fs::path& dir) {
  const auto spec = envs::EnvSpec::make(envs::EnvKind::pendulum);
  rollout::Demo demo{rollout::random_episode(spec, {}, 5).states, std::nullopt};
  const auto path = dir / "demo.txt";
  rollout::save_demo(demo, path);
  return path;
}

const std::string kSmall = " --env pendulum --steps 400 --steps-per-iter 200";

}  // namespace

TEST(Settings, ParseAndLabel) {
  const auto d = cli::parse_setting("mass=2,friction=3");
  EXPECT_EQ(d.mass_scale, 2.0);
  EXPECT_EQ(d.friction_scale, 3.0);
  EXPECT_EQ(d.gravity_scale, 1.0);
  EXPECT_EQ(cli::setting_label(d), "mass=2,friction=3");
  EXPECT_EQ(cli::setting_label(cli::parse_setting("default")), "default");
  EXPECT_EQ(cli::setting_label(cli::parse_setting("gravity=0.5")), "gravity=0.5");
  EXPECT_THROW(cli::parse_setting("gravity"), ContractError);
  EXPECT_THROW(cli::parse_setting("wind=2"), ContractError);
  EXPECT_THROW(cli::parse_setting("mass=2x"), ContractError);
  EXPECT_THROW(cli::parse_setting("mass=-1"), ContractError);
}

TEST(KeyValues, RoundTripWithComments) {
  const auto dir = scratch_dir("kv");
  cli::write_key_values(dir / "a.txt", {{"b", "2"}, {"a", "x y"}});
  EXPECT_EQ(cli::read_key_values(dir / "a.txt"), (std::map<std::string, std::string>{{"a", "x y"}, {"b", "2"}}));
  std::ofstream(dir / "c.txt") << "# comment\n seed = 3  # trailing\n\n";
  EXPECT_EQ(cli::read_key_values(dir / "c.txt").at("seed"), "3");
  std::ofstream(dir / "d.txt") << "novalue\n";
  EXPECT_THROW(cli::read_key_values(dir / "d.txt"), PreconditionError);
}

TEST(OutputRoot, EnvironmentOverride) {
  setenv("I2L_RUN_DIR", "/tmp/somewhere", 1);
  EXPECT_EQ(cli::output_root(), fs::path("/tmp/somewhere"));
  unsetenv("I2L_RUN_DIR");
  EXPECT_EQ(cli::output_root(), fs::path("run"));
}

TEST(Usage, ExitCodes) {
  const auto root = scratch_dir("cli_usage");
  EXPECT_EQ(run_cli("", root).code, 2);
  EXPECT_EQ(run_cli("bogus", root).code, 2);
  EXPECT_EQ(run_cli("--help", root).code, 0);
  EXPECT_EQ(run_cli("imitate --help", root).code, 0);
  EXPECT_EQ(run_cli("imitate --env pendulum", root).code, 2);
  EXPECT_EQ(run_cli("imitate --algo i2l --demo /nonexistent/demo.txt --env pendulum", root).code, 2);
  EXPECT_EQ(run_cli("imitate --algo nope --demo x --env pendulum", root).code, 2);
  EXPECT_EQ(run_cli("imitate --algo i2l --demo x --env cartpole", root).code, 2);
  const auto v = run_cli("--version", root);
  EXPECT_EQ(v.code, 0);
  EXPECT_FALSE(v.output.empty());
}

TEST(Imitate, DeterministicMetricsAndArtifacts) {
  const auto root = scratch_dir("cli_imitate");
  const auto demo = random_demo(root);
  const std::string args = "imitate --algo i2l --demo " + demo.string() + kSmall + " --seed 3 --name ";
  const auto a = run_cli(args + "a", root);
  ASSERT_EQ(a.code, 0) << a.output;
  EXPECT_NE(a.output.find("final_return="), std::string::npos);
  ASSERT_EQ(run_cli(args + "b", root).code, 0);
  const std::string ma = slurp(root / "a" / "metrics.csv");
  EXPECT_FALSE(ma.empty());
  EXPECT_EQ(ma, slurp(root / "b" / "metrics.csv"));
  const auto manifest = cli::read_key_values(root / "a" / "manifest.txt");
  EXPECT_EQ(manifest.at("status"), "done");
  EXPECT_EQ(manifest.at("seed"), "3");
  EXPECT_TRUE(fs::exists(root / "a" / "final.txt"));
  EXPECT_TRUE(fs::exists(root / "a" / "policy.ckpt"));
}

TEST(Imitate, DefaultNameAndCapacityOne) {
  const auto root = scratch_dir("cli_k1");
  const auto demo = random_demo(root);
  const auto r = run_cli("imitate --algo i2l --demo " + demo.string() + kSmall + " --buffer-capacity 1", root);
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_TRUE(fs::exists(root / "i2l-pendulum-default-K1-s0" / "metrics.csv"));
}

TEST(Imitate, AlgorithmDefaultsUnlessOverridden) {
  const auto root = scratch_dir("cli_defaults");
  const auto demo = random_demo(root);
  const std::string base = "imitate --demo " + demo.string() + " --env pendulum --steps 200 --steps-per-iter 200";
  ASSERT_EQ(run_cli(base + " --algo i2l --name i", root).code, 0);
  ASSERT_EQ(run_cli(base + " --algo gail_s --name g", root).code, 0);
  ASSERT_EQ(run_cli(base + " --algo i2l --disc-steps 7 --ppo-lr 0.002 --name o", root).code, 0);
  const auto i = cli::read_key_values(root / "i" / "manifest.txt");
  const auto g = cli::read_key_values(root / "g" / "manifest.txt");
  const auto o = cli::read_key_values(root / "o" / "manifest.txt");
  EXPECT_EQ(i.at("disc_steps"), std::to_string(trainers::kI2lDiscSteps));
  EXPECT_EQ(std::stod(i.at("ppo_lr")), trainers::kI2lPpoLearningRate);
  EXPECT_EQ(g.at("disc_steps"), std::to_string(adversary::kDiscSteps));
  EXPECT_EQ(std::stod(g.at("disc_lr")), adversary::kDiscLearningRate);
  EXPECT_EQ(o.at("disc_steps"), "7");
  EXPECT_EQ(std::stod(o.at("ppo_lr")), 0.002);
  EXPECT_EQ(std::stod(o.at("disc_lr")), trainers::kI2lDiscLearningRate);
}

TEST(Imitate, ConfigFile) {
  const auto root = scratch_dir("cli_config");
  const auto demo = random_demo(root);
  std::ofstream(root / "run.cfg") << "algo=gail_s\ndemo=" << demo.string()
                                  << "\nenv=pendulum\nsteps=200\nsteps-per-iter=200\nname=fromcfg\n";
  const auto r = run_cli("imitate --config " + (root / "run.cfg").string(), root);
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(cli::read_key_values(root / "fromcfg" / "manifest.txt").at("algorithm"), "gail_s");

  // Flags on the command line override the file.
  const auto o = run_cli("imitate --config " + (root / "run.cfg").string() + " --steps 400 --name=over", root);
  ASSERT_EQ(o.code, 0) << o.output;
  EXPECT_EQ(cli::read_key_values(root / "over" / "manifest.txt").at("steps"), "400");
  EXPECT_EQ(run_cli("imitate --config /nonexistent.cfg", root).code, 2);
}

TEST(Imitate, ActionBaselinesNeedActionDemo) {
  const auto root = scratch_dir("cli_sa");
  const auto demo = random_demo(root);
  const auto r = run_cli("imitate --algo airl --demo " + demo.string() + kSmall, root);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("demo-sa"), std::string::npos);
}

TEST(Measure, NeedsSnapshotsThenReportsGap) {
  const auto root = scratch_dir("cli_measure");
  const auto demo = random_demo(root);
  ASSERT_EQ(run_cli("expert --env pendulum --steps 2000 --name oracle", root).code, 0);
  const auto oracle = (root / "oracle" / "policy.ckpt").string();
  EXPECT_TRUE(fs::exists(root / "oracle" / "demo.txt"));
  EXPECT_TRUE(fs::exists(root / "oracle" / "demo_sa.txt"));

  const std::string imitate = "imitate --algo i2l --demo " + demo.string() + kSmall;
  ASSERT_EQ(run_cli(imitate + " --snapshot-every 0 --name nosnap", root).code, 0);
  const auto missing = run_cli("measure --run " + (root / "nosnap").string() + " --oracle " + oracle, root);
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.output.find("snapshot"), std::string::npos);

  ASSERT_EQ(run_cli(imitate + " --snapshot-every 1 --name snap", root).code, 0);
  const auto m = run_cli("measure --run " + (root / "snap").string() + " --oracle " + oracle +
                             " --critic-steps 5 --window 1 --oracle-episodes 1",
                         root);
  ASSERT_EQ(m.code, 0) << m.output;
  EXPECT_NE(m.output.find("w1_trend"), std::string::npos);
  const std::string gap = slurp(root / "snap" / "gap.csv");
  EXPECT_EQ(gap.rfind("iter,lhs,rhs_L0.5,rhs_L1.0,rhs_L1.5\n1,", 0), 0u);
  EXPECT_TRUE(fs::exists(root / "snap" / "w1_trend.csv"));
}

TEST(Matrix, SummaryAndResume) {
  const auto root = scratch_dir("cli_matrix");
  const auto demo = random_demo(root);
  const std::string args = "matrix --env pendulum --algos i2l gail_s --settings default gravity=0.5 --seeds 2 "
                           "--steps 200 --steps-per-iter 200 --name m --demo " + demo.string();
  const auto first = run_cli(args, root);
  ASSERT_EQ(first.code, 0) << first.output;
  const std::string summary = slurp(root / "m" / "summary.csv");
  std::istringstream lines(summary);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "algo,setting,n,mean,std,failed");
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    EXPECT_NE(line.find(",2,"), std::string::npos) << line;
    EXPECT_EQ(line.back(), '0') << line;
  }
  EXPECT_EQ(rows, 4);
  EXPECT_TRUE(fs::exists(root / "m" / "i2l" / "gravity=0.5" / "s1" / "final.txt"));

  const auto again = run_cli(args + " --resume", root);
  ASSERT_EQ(again.code, 0);
  int skipped = 0;
  for (std::size_t at = again.output.find("skip "); at != std::string::npos; at = again.output.find("skip ", at + 1))
    ++skipped;
  EXPECT_EQ(skipped, 8);
  EXPECT_EQ(slurp(root / "m" / "summary.csv"), summary);
}
