#include <gtest/gtest.h>

#include <cmath>

#include "i2l/adversary.hpp"
#include "i2l/errors.hpp"
#include "support.hpp"

using namespace i2l;
using namespace i2l::adversary;
using testing_support::numeric_gradient;
using testing_support::random_matrix;
using testing_support::relative_error;

namespace {

PairBatch random_pairs(Eigen::Index n, Rng& rng, double shift = 0.0) {
  PairBatch b{random_matrix(3, n, rng), random_matrix(1, n, rng)};
  b.states.array() += shift;
  return b;
}

AirlDiscriminator small_airl(Rng& rng, int width = 8) {
  return AirlDiscriminator::create(3, 1, StateNormalizer::identity(3), rng, kDiscLearningRate, width);
}

void zero_out(nn::Network& net) { net.set_flat_parameters(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.parameter_count()))); }

}  // namespace

TEST(Scalars, StableSigmoidAndSoftplus) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_NEAR(sigmoid(800.0), 1.0, 0.0);
  EXPECT_EQ(sigmoid(-800.0), 0.0);
  EXPECT_NEAR(softplus(0.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(softplus(800.0), 800.0, 1e-12);
  EXPECT_GT(softplus(-800.0), -1.0);
}

TEST(Airl, ZeroFAndUnitDensityGivesHalf) {
  Rng rng(1);
  auto d = small_airl(rng);
  zero_out(d.f);
  // pi(a|s) = 1 means log pi = 0.
  EXPECT_EQ(airl_d(d, Eigen::Vector3d(1, 2, 3), Eigen::VectorXd::Constant(1, 0.4), 0.0), 0.5);
  EXPECT_EQ(imitation_reward(d, Eigen::Vector3d(1, 2, 3), Eigen::VectorXd::Constant(1, 0.4), 0.0), 0.0);
}

TEST(Airl, RewardIsLogOdds) {
  Rng rng(2);
  const auto d = small_airl(rng, 16);
  for (int k = 0; k < 200; ++k) {
    const Eigen::VectorXd s = random_matrix(3, 1, rng);
    const Eigen::VectorXd a = random_matrix(1, 1, rng);
    const double lp = random_matrix(1, 1, rng)(0, 0);
    const double D = airl_d(d, s, a, lp);
    EXPECT_NEAR(imitation_reward(d, s, a, lp), std::log(D) - std::log(1.0 - D), 1e-9);
    EXPECT_NEAR(imitation_reward(d, s, a, lp) - (d.f_value(s, a) - lp), 0.0, 1e-12);
  }
}

TEST(Airl, BatchRewardsMatchScalar) {
  Rng rng(3);
  const auto d = small_airl(rng);
  const auto b = random_pairs(7, rng);
  const Eigen::VectorXd lp = random_matrix(7, 1, rng);
  const auto r = imitation_rewards(d, b.states, b.actions, lp);
  for (int i = 0; i < 7; ++i) EXPECT_NEAR(r[i], imitation_reward(d, b.states.col(i), b.actions.col(i), lp[i]), 1e-12);
  EXPECT_THROW(imitation_rewards(d, b.states, b.actions, lp.head(3)), ContractError);
}

TEST(Airl, IdenticalBatchesAtZeroFGiveTwoLogHalf) {
  Rng rng(4);
  auto d = small_airl(rng);
  zero_out(d.f);
  const auto b = random_pairs(10, rng);
  const Eigen::VectorXd lp = Eigen::VectorXd::Zero(10);
  EXPECT_NEAR(airl_objective(d, b, lp, b, lp).objective, 2.0 * std::log(0.5), 1e-15);
}

TEST(Airl, ObjectiveGradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(400 + seed);
    const auto d = small_airl(rng);
    const auto pos = random_pairs(6, rng, 0.5);
    const auto neg = random_pairs(5, rng);
    const Eigen::VectorXd lp_pos = random_matrix(6, 1, rng);
    const Eigen::VectorXd lp_neg = random_matrix(5, 1, rng);
    const auto o = airl_objective(d, pos, lp_pos, neg, lp_neg);
    const auto fd = numeric_gradient(
        [&](const Eigen::VectorXd& p) {
          auto e = d;
          e.f.set_flat_parameters(p);
          return -airl_objective(e, pos, lp_pos, neg, lp_neg).objective;
        },
        d.f.flat_parameters());
    EXPECT_LT(relative_error(o.grads.flatten(), fd), 1e-4) << "seed " << seed;
  }
}

TEST(Airl, UpdateLeavesPolicyUntouchedAndSeparates) {
  Rng rng(5);
  auto d = small_airl(rng, 16);
  const auto pol = policy::GaussianPolicy::create(3, 1, rng, 8);
  const auto before = pol.flat_parameters();
  const auto pos = random_pairs(64, rng, 1.5);
  const auto neg = random_pairs(64, rng, -1.5);
  const auto r = airl_update(d, pos, neg, pol, 200);
  EXPECT_EQ(pol.flat_parameters(), before);
  EXPECT_LT(r.loss_after, r.loss_before);
  EXPECT_EQ(d.optimizer.step_count(), 200);
}

TEST(Airl, EmptyBatchesArePreconditionErrors) {
  Rng rng(6);
  auto d = small_airl(rng);
  const auto pol = policy::GaussianPolicy::create(3, 1, rng, 8);
  const PairBatch empty{Eigen::MatrixXd(3, 0), Eigen::MatrixXd(1, 0)};
  const auto b = random_pairs(4, rng);
  EXPECT_THROW(airl_update(d, empty, b, pol), PreconditionError);
  EXPECT_THROW(airl_update(d, b, empty, pol), PreconditionError);
}

TEST(StateDisc, InputsPerMode) {
  Rng rng(7);
  const auto norm = StateNormalizer::identity(3);
  const DiscInput s_only{random_matrix(3, 4, rng), std::nullopt, std::nullopt};
  const DiscInput with_next{s_only.states, random_matrix(3, 4, rng), std::nullopt};
  const DiscInput with_act{s_only.states, std::nullopt, random_matrix(1, 4, rng)};

  const auto gs = StateDiscriminator::create(DiscMode::gail_s, 3, 1, norm, rng, kDiscLearningRate, 8);
  EXPECT_EQ(gs.inputs(s_only).rows(), 3);
  const auto gf = StateDiscriminator::create(DiscMode::gaifo, 3, 1, norm, rng, kDiscLearningRate, 8);
  EXPECT_EQ(gf.inputs(with_next).rows(), 6);
  EXPECT_THROW(gf.inputs(s_only), ContractError);
  const auto ga = StateDiscriminator::create(DiscMode::gail_sa, 3, 1, norm, rng, kDiscLearningRate, 8);
  EXPECT_EQ(ga.inputs(with_act).rows(), 4);
  EXPECT_THROW(ga.inputs(s_only), ContractError);
}

TEST(StateDisc, RewardIsMinusLogOneMinusD) {
  Rng rng(8);
  const auto d = StateDiscriminator::create(DiscMode::gail_s, 3, 1, StateNormalizer::identity(3), rng);
  const DiscInput b{random_matrix(3, 9, rng), std::nullopt, std::nullopt};
  const auto p = d.probabilities(b);
  const auto r = d.rewards(b);
  for (int i = 0; i < 9; ++i) EXPECT_NEAR(r[i], -std::log(1.0 - p[i]), 1e-12);
}

TEST(StateDisc, LossGradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(500 + seed);
    const auto mode = static_cast<DiscMode>(seed % 3);
    const auto d = StateDiscriminator::create(mode, 3, 1, StateNormalizer::identity(3), rng, kDiscLearningRate, 8);
    const DiscInput e{random_matrix(3, 5, rng), random_matrix(3, 5, rng), random_matrix(1, 5, rng)};
    const DiscInput p{random_matrix(3, 6, rng), random_matrix(3, 6, rng), random_matrix(1, 6, rng)};
    const auto l = state_disc_loss(d, e, p);
    const auto fd = numeric_gradient(
        [&](const Eigen::VectorXd& w) {
          auto c = d;
          c.net.set_flat_parameters(w);
          return state_disc_loss(c, e, p).loss;
        },
        d.net.flat_parameters());
    EXPECT_LT(relative_error(l.grads.flatten(), fd), 1e-4) << to_string(mode);
  }
}

TEST(StateDisc, UpdateLearnsToSeparate) {
  Rng rng(9);
  auto d = StateDiscriminator::create(DiscMode::gail_s, 3, 1, StateNormalizer::identity(3), rng, 1e-3, 16);
  DiscInput e{random_matrix(3, 64, rng), std::nullopt, std::nullopt};
  DiscInput p{random_matrix(3, 64, rng), std::nullopt, std::nullopt};
  e.states.array() += 2.0;
  const auto r = state_disc_update(d, e, p, 300);
  EXPECT_LT(r.loss_after, r.loss_before);
  EXPECT_GT(d.probabilities(e).mean(), d.probabilities(p).mean());
}
