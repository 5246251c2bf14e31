#include "i2l/errors.hpp"
#include "internal.hpp"

namespace i2l::trainers {

namespace {

Eigen::MatrixXd stack_pairs(const adversary::PairBatch& b) {
  Eigen::MatrixXd x(b.states.rows() + b.actions.rows(), b.size());
  x.topRows(b.states.rows()) = b.states;
  x.bottomRows(b.actions.rows()) = b.actions;
  return x;
}

}  // namespace

std::vector<GapRow> measure_lower_bound_gap(const GapInputs& in) {
  if (in.snapshots.empty()) throw PreconditionError("gap: no buffer snapshots; rerun imitate with snapshots enabled");
  if (in.oracle_pairs.size() == 0) throw PreconditionError("gap: empty oracle sample");
  const Eigen::MatrixXd oracle_sa = stack_pairs(in.oracle_pairs);
  const double lhs = in.f.f_values(in.oracle_pairs.states, in.oracle_pairs.actions).mean();
  // The measurement critic sees (s, a); its normalizer is fitted once on the
  // oracle tuples so every snapshot is measured on the same scale.
  const StateNormalizer norm = StateNormalizer::fit(oracle_sa);

  std::vector<GapRow> rows;
  for (const auto& [iter, buf] : in.snapshots) {
    if (buf.empty()) throw PreconditionError("gap: empty buffer snapshot at iteration " + std::to_string(iter));
    const adversary::PairBatch pairs = buf.all_pairs();
    const Eigen::MatrixXd buffer_sa = stack_pairs(pairs);
    Rng rng(derive_seed(in.seed, static_cast<std::uint64_t>(iter)));
    auto critic = wcritic::WassersteinCritic::create(static_cast<int>(oracle_sa.rows()), norm, rng, in.clip_bound,
                                                     in.critic_lr, 64);
    wcritic::critic_update(critic, oracle_sa, buffer_sa, in.critic_steps);

    GapRow row;
    row.iter = iter;
    row.lhs = lhs;
    row.buffer_f = in.f.f_values(pairs.states, pairs.actions).mean();
    row.w1 = wcritic::w1_estimate(critic, oracle_sa, buffer_sa);
    for (std::size_t k = 0; k < kLipschitzValues.size(); ++k) row.rhs[k] = row.buffer_f - kLipschitzValues[k] * row.w1;
    rows.push_back(row);
  }
  return rows;
}

W1Trend measure_w1_trend(const std::vector<IterationMetrics>& metrics, int window) {
  if (window <= 0) throw ContractError("w1 trend: window must be > 0");
  const auto n = static_cast<int>(metrics.size());
  if (n < 2 * window)
    throw PreconditionError("w1 trend: need at least " + std::to_string(2 * window) + " iterations, have " +
                            std::to_string(n));
  W1Trend t;
  for (int k = 0; k < window; ++k) {
    t.initial_mean += metrics[static_cast<std::size_t>(k)].w1;
    t.final_mean += metrics[static_cast<std::size_t>(n - window + k)].w1;
  }
  t.initial_mean /= window;
  t.final_mean /= window;
  t.decreased = t.final_mean < t.initial_mean;
  return t;
}

}  // namespace i2l::trainers
