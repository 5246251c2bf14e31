#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "i2l/buffer.hpp"
#include "i2l/errors.hpp"
#include "support.hpp"

using namespace i2l;
using buffer::PriorityBuffer;

namespace {

Trajectory traj_with(Eigen::Index length, double fill) {
  Trajectory t;
  t.states = Eigen::MatrixXd::Constant(2, length, fill);
  t.actions = Eigen::MatrixXd::Constant(1, length, -fill);
  return t;
}

std::vector<double> scores_of(const PriorityBuffer& b) {
  std::vector<double> s;
  for (const auto& e : b.entries()) s.push_back(e.score);
  std::sort(s.begin(), s.end());
  return s;
}

PriorityBuffer buffer_with(std::initializer_list<double> scores, std::size_t capacity) {
  PriorityBuffer b(capacity);
  for (double s : scores) b.offer_scored(traj_with(3, s), s);
  return b;
}

wcritic::WassersteinCritic critic_for(Rng& rng, int dim = 2) {
  return wcritic::WassersteinCritic::create(dim, StateNormalizer::identity(dim), rng, 0.5, 5e-5, 8);
}

}  // namespace

TEST(Offer, AcceptsBetterThanRoot) {
  auto b = buffer_with({1, 2, 3}, 3);
  EXPECT_TRUE(b.offer_scored(traj_with(3, 2.5), 2.5));
  EXPECT_EQ(scores_of(b), (std::vector<double>{2, 2.5, 3}));
}

TEST(Offer, RejectsWorseOrEqual) {
  auto b = buffer_with({1, 2, 3}, 3);
  EXPECT_FALSE(b.offer_scored(traj_with(3, 0.5), 0.5));
  EXPECT_FALSE(b.offer_scored(traj_with(3, 1.0), 1.0));
  EXPECT_EQ(scores_of(b), (std::vector<double>{1, 2, 3}));
}

TEST(Offer, BootstrapsBelowCapacity) {
  PriorityBuffer b(4);
  EXPECT_TRUE(b.offer_scored(traj_with(2, 0), 5.0));
  EXPECT_TRUE(b.offer_scored(traj_with(2, 0), -5.0));
  EXPECT_EQ(b.size(), 2u);
  EXPECT_FALSE(b.full());
  EXPECT_DOUBLE_EQ(b.min_score(), -5.0);
}

TEST(Offer, StateOnlyAndEmptyAreRejected) {
  PriorityBuffer b(2);
  Trajectory t;
  t.states = Eigen::MatrixXd::Zero(2, 3);
  EXPECT_THROW(b.offer_scored(t, 1.0), ContractError);
  EXPECT_THROW(b.offer_scored(traj_with(0, 0), 1.0), ContractError);
  EXPECT_THROW(PriorityBuffer(0), ContractError);
}

TEST(Offer, MatchesTopKOracle) {
  for (std::size_t K : {1u, 5u, 50u}) {
    Rng rng(K);
    std::uniform_int_distribution<int> score(-200, 200);  // coarse grid forces ties
    PriorityBuffer b(K);
    std::vector<double> all;
    double last_mean = -INFINITY;
    for (int k = 0; k < 1000; ++k) {
      const double s = score(rng) / 10.0;
      all.push_back(s);
      b.offer_scored(traj_with(2, s), s);
      ASSERT_TRUE(b.heap_property_holds());
      if (b.full()) {
        EXPECT_GE(b.mean_score(), last_mean);
        last_mean = b.mean_score();
      }
    }
    std::sort(all.rbegin(), all.rend());
    all.resize(K);
    std::sort(all.begin(), all.end());
    EXPECT_EQ(scores_of(b), all);
  }
}

TEST(Offer, WithCriticScoresTrajectoryMean) {
  Rng rng(3);
  const auto c = critic_for(rng);
  PriorityBuffer b(2);
  const auto t = traj_with(4, 0.7);
  b.offer(t, c);
  EXPECT_DOUBLE_EQ(b.entries()[0].score, wcritic::score_trajectory(c, t));
}

TEST(Rescore, ConstantCriticTiesOnInsertionOrder) {
  Rng rng(4);
  auto c = critic_for(rng);
  c.g.set_flat_parameters(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(c.g.parameter_count())));
  c.g.mutable_layers().back().bias[0] = 0.25;
  auto b = buffer_with({3, 1, 2}, 3);
  b.rescore_all(c);
  for (const auto& e : b.entries()) EXPECT_EQ(e.score, 0.25);
  EXPECT_EQ(b.entries()[0].insertion_id, 0u);
  EXPECT_TRUE(b.heap_property_holds());
}

TEST(Rescore, UnchangedCriticIsIdempotent) {
  Rng rng(5);
  const auto c = critic_for(rng);
  PriorityBuffer b(4);
  for (int k = 0; k < 6; ++k) b.offer(traj_with(3, 0.3 * k - 0.8), c);
  const auto before = b.entries();
  b.rescore_all(c);
  ASSERT_EQ(b.entries().size(), before.size());
  for (std::size_t i = 0; i < before.size(); ++i) {
    EXPECT_EQ(b.entries()[i].score, before[i].score);
    EXPECT_EQ(b.entries()[i].insertion_id, before[i].insertion_id);
  }
}

TEST(Rescore, NewRootIsArgminOfRecomputedScores) {
  Rng rng(6);
  const auto c1 = critic_for(rng);
  const auto c2 = critic_for(rng);
  PriorityBuffer b(6);
  for (int k = 0; k < 6; ++k) {
    Trajectory t;
    t.states = testing_support::random_matrix(2, 5, rng);
    t.actions = Eigen::MatrixXd::Zero(1, 5);
    b.offer(t, c1);
  }
  b.rescore_all(c2);
  double lowest = INFINITY;
  for (const auto& e : b.entries()) lowest = std::min(lowest, wcritic::score_trajectory(c2, e.traj));
  EXPECT_EQ(b.min_score(), lowest);
  EXPECT_TRUE(b.heap_property_holds());
}

TEST(Rescore, EmptyBufferIsNoOp) {
  Rng rng(7);
  PriorityBuffer b(3);
  b.rescore_all(critic_for(rng));
  EXPECT_TRUE(b.empty());
  EXPECT_THROW(b.mean_score(), ContractError);
}

TEST(Sample, SingleTupleBuffer) {
  PriorityBuffer b(1);
  b.offer_scored(traj_with(1, 0.5), 0.0);
  const auto s = b.sample_pairs(20, 1);
  EXPECT_TRUE((s.states.array() == 0.5).all());
  EXPECT_TRUE((s.actions.array() == -0.5).all());
}

TEST(Sample, SeededAndEmptyError) {
  auto b = buffer_with({1, 2}, 2);
  const auto x = b.sample_pairs(50, 3);
  const auto y = b.sample_pairs(50, 3);
  EXPECT_EQ(x.states, y.states);
  PriorityBuffer empty(2);
  EXPECT_THROW(empty.sample_pairs(1, 0), ContractError);
}

TEST(Sample, UniformOverTuples) {
  PriorityBuffer b(2);
  b.offer_scored(traj_with(100, 1.0), 0.0);
  b.offer_scored(traj_with(300, 2.0), 0.0);
  const std::size_t n = 100000;
  const auto s = b.sample_pairs(n, 11);
  const double frac = (s.states.row(0).array() == 1.0).cast<double>().sum() / static_cast<double>(n);
  const double sigma = std::sqrt(0.25 * 0.75 / static_cast<double>(n));
  EXPECT_NEAR(frac, 0.25, 3.0 * sigma);
}

TEST(Serialize, RoundTrip) {
  Rng rng(12);
  PriorityBuffer b(3);
  for (int k = 0; k < 5; ++k) {
    Trajectory t;
    t.states = testing_support::random_matrix(2, 4, rng);
    t.actions = testing_support::random_matrix(1, 4, rng);
    b.offer_scored(t, k / 3.0);
  }
  std::stringstream ss;
  b.save(ss);
  auto back = PriorityBuffer::load(ss);
  ASSERT_EQ(back.size(), b.size());
  EXPECT_EQ(back.capacity(), 3u);
  for (std::size_t i = 0; i < b.size(); ++i) {
    EXPECT_EQ(back.entries()[i].score, b.entries()[i].score);
    EXPECT_EQ(back.entries()[i].traj.states, b.entries()[i].traj.states);
    EXPECT_EQ(*back.entries()[i].traj.actions, *b.entries()[i].traj.actions);
  }
  // Insertion ids continue after a reload.
  back.offer_scored(traj_with(4, 0), 10.0);
  b.offer_scored(traj_with(4, 0), 10.0);
  EXPECT_EQ(scores_of(back), scores_of(b));
}

TEST(Serialize, Garbage) {
  std::stringstream ss("buffer v9");
  EXPECT_THROW(PriorityBuffer::load(ss), ContractError);
  EXPECT_THROW(buffer::load_buffer("/nonexistent/buffer.ckpt"), PreconditionError);
}
