#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "i2l/adversary.hpp"
#include "i2l/trajectory.hpp"
#include "i2l/wcritic.hpp"

namespace i2l::buffer {

struct ScoredTrajectory {
  Trajectory traj;
  double score = 0.0;
  std::uint64_t insertion_id = 0;
};

// Fixed-capacity min-heap of learner trajectories keyed by (score,
// insertion_id). The root is the lowest-scoring (and, on ties, oldest)
// trajectory, which is the one a better newcomer evicts.
class PriorityBuffer {
 public:
  explicit PriorityBuffer(std::size_t capacity);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return heap_.size(); }
  bool empty() const { return heap_.empty(); }
  bool full() const { return heap_.size() >= capacity_; }

  // Recomputes every stored score with `critic` and re-heapifies.
  void rescore_all(const wcritic::WassersteinCritic& critic);

  // Below capacity the trajectory is inserted unconditionally. At capacity it
  // replaces the root iff its score is strictly greater than the root's.
  // Returns whether it was admitted. Throws ContractError for state-only input.
  bool offer(Trajectory traj, const wcritic::WassersteinCritic& critic);
  // Same protocol with a precomputed score.
  bool offer_scored(Trajectory traj, double score);

  double mean_score() const;
  double min_score() const;

  // n uniform draws with replacement over all stored (s, a) tuples.
  adversary::PairBatch sample_pairs(std::size_t n, std::uint64_t seed) const;
  // Every stored state, trajectory by trajectory in heap order.
  Eigen::MatrixXd all_states() const;
  adversary::PairBatch all_pairs() const;
  std::size_t total_pairs() const;

  // Heap storage (index 0 is the root); exposed for invariant checks.
  const std::vector<ScoredTrajectory>& entries() const { return heap_; }
  bool heap_property_holds() const;

  // "buffer v1 <capacity> <count> <next_id>", then per trajectory
  // "traj <score> <insertion_id> <T> <state_dim> <action_dim>" and T lines of
  // state values followed by action values.
  void save(std::ostream& out) const;
  static PriorityBuffer load(std::istream& in);

 private:
  void insert(ScoredTrajectory entry);

  std::size_t capacity_;
  std::uint64_t next_id_ = 0;
  std::vector<ScoredTrajectory> heap_;
};

void save_buffer(const PriorityBuffer& buffer, const std::filesystem::path& path);
PriorityBuffer load_buffer(const std::filesystem::path& path);

}  // namespace i2l::buffer
