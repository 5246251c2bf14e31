#include "i2l/buffer.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <string>

#include "i2l/errors.hpp"
#include "i2l/rng.hpp"

namespace i2l::buffer {

namespace {

// std heap algorithms build a max-heap w.r.t. the comparator; "greater" gives
// a min-heap on (score, insertion_id).
bool later(const ScoredTrajectory& a, const ScoredTrajectory& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.insertion_id > b.insertion_id;
}

}  // namespace

PriorityBuffer::PriorityBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ContractError("buffer capacity must be > 0");
  heap_.reserve(capacity);
}

void PriorityBuffer::rescore_all(const wcritic::WassersteinCritic& critic) {
  for (auto& e : heap_) e.score = wcritic::score_trajectory(critic, e.traj);
  std::make_heap(heap_.begin(), heap_.end(), later);
}

bool PriorityBuffer::offer(Trajectory traj, const wcritic::WassersteinCritic& critic) {
  if (!traj.has_actions()) throw ContractError("buffer: trajectories must carry actions");
  const double score = wcritic::score_trajectory(critic, traj);
  return offer_scored(std::move(traj), score);
}

bool PriorityBuffer::offer_scored(Trajectory traj, double score) {
  if (!traj.has_actions()) throw ContractError("buffer: trajectories must carry actions");
  if (traj.length() == 0) throw ContractError("buffer: empty trajectory");
  ScoredTrajectory entry{std::move(traj), score, next_id_++};
  if (heap_.size() < capacity_) {
    insert(std::move(entry));
    return true;
  }
  if (!(entry.score > heap_.front().score)) return false;
  std::pop_heap(heap_.begin(), heap_.end(), later);
  heap_.back() = std::move(entry);
  std::push_heap(heap_.begin(), heap_.end(), later);
  return true;
}

void PriorityBuffer::insert(ScoredTrajectory entry) {
  heap_.push_back(std::move(entry));
  std::push_heap(heap_.begin(), heap_.end(), later);
}

double PriorityBuffer::mean_score() const {
  if (heap_.empty()) throw ContractError("mean_score: empty buffer");
  double s = 0.0;
  for (const auto& e : heap_) s += e.score;
  return s / static_cast<double>(heap_.size());
}

double PriorityBuffer::min_score() const {
  if (heap_.empty()) throw ContractError("min_score: empty buffer");
  return heap_.front().score;
}

std::size_t PriorityBuffer::total_pairs() const {
  std::size_t n = 0;
  for (const auto& e : heap_) n += static_cast<std::size_t>(e.traj.length());
  return n;
}

adversary::PairBatch PriorityBuffer::sample_pairs(std::size_t n, std::uint64_t seed) const {
  if (heap_.empty()) throw ContractError("sample_pairs: empty buffer");
  const std::size_t total = total_pairs();
  std::vector<std::size_t> offsets;
  offsets.reserve(heap_.size());
  std::size_t acc = 0;
  for (const auto& e : heap_) {
    offsets.push_back(acc);
    acc += static_cast<std::size_t>(e.traj.length());
  }
  const auto& first = heap_.front().traj;
  adversary::PairBatch out{Eigen::MatrixXd(first.states.rows(), static_cast<Eigen::Index>(n)),
                           Eigen::MatrixXd(first.actions->rows(), static_cast<Eigen::Index>(n))};
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, total - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t g = pick(rng);
    const auto it = std::upper_bound(offsets.begin(), offsets.end(), g) - 1;
    const auto k = static_cast<std::size_t>(it - offsets.begin());
    const auto t = static_cast<Eigen::Index>(g - *it);
    out.states.col(static_cast<Eigen::Index>(i)) = heap_[k].traj.states.col(t);
    out.actions.col(static_cast<Eigen::Index>(i)) = heap_[k].traj.actions->col(t);
  }
  return out;
}

Eigen::MatrixXd PriorityBuffer::all_states() const {
  return all_pairs().states;
}

adversary::PairBatch PriorityBuffer::all_pairs() const {
  if (heap_.empty()) return {};
  const auto n = static_cast<Eigen::Index>(total_pairs());
  const auto& first = heap_.front().traj;
  adversary::PairBatch out{Eigen::MatrixXd(first.states.rows(), n), Eigen::MatrixXd(first.actions->rows(), n)};
  Eigen::Index at = 0;
  for (const auto& e : heap_) {
    out.states.middleCols(at, e.traj.length()) = e.traj.states;
    out.actions.middleCols(at, e.traj.length()) = *e.traj.actions;
    at += e.traj.length();
  }
  return out;
}

bool PriorityBuffer::heap_property_holds() const {
  for (std::size_t i = 1; i < heap_.size(); ++i) {
    const auto& parent = heap_[(i - 1) / 2];
    const auto& child = heap_[i];
    if (later(parent, child)) return false;
  }
  return heap_.size() <= capacity_;
}

void PriorityBuffer::save(std::ostream& out) const {
  out << "buffer v1 " << capacity_ << ' ' << heap_.size() << ' ' << next_id_ << '\n'
      << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& e : heap_) {
    const auto& tr = e.traj;
    out << "traj " << e.score << ' ' << e.insertion_id << ' ' << tr.length() << ' ' << tr.states.rows() << ' '
        << tr.actions->rows() << '\n';
    for (Eigen::Index t = 0; t < tr.length(); ++t) {
      for (Eigen::Index i = 0; i < tr.states.rows(); ++i) out << (i ? " " : "") << tr.states(i, t);
      for (Eigen::Index i = 0; i < tr.actions->rows(); ++i) out << ' ' << (*tr.actions)(i, t);
      out << '\n';
    }
  }
}

PriorityBuffer PriorityBuffer::load(std::istream& in) {
  std::string magic, version;
  std::size_t capacity = 0, count = 0;
  std::uint64_t next_id = 0;
  if (!(in >> magic >> version >> capacity >> count >> next_id) || magic != "buffer" || version != "v1")
    throw ContractError("not a buffer v1 stream");
  PriorityBuffer b(capacity);
  b.next_id_ = next_id;
  for (std::size_t k = 0; k < count; ++k) {
    std::string tag;
    ScoredTrajectory e;
    Eigen::Index T = 0, sd = 0, ad = 0;
    if (!(in >> tag >> e.score >> e.insertion_id >> T >> sd >> ad) || tag != "traj")
      throw ContractError("buffer stream: bad trajectory header");
    e.traj.states.resize(sd, T);
    e.traj.actions = Eigen::MatrixXd(ad, T);
    for (Eigen::Index t = 0; t < T; ++t) {
      for (Eigen::Index i = 0; i < sd; ++i)
        if (!(in >> e.traj.states(i, t))) throw ContractError("buffer stream: truncated");
      for (Eigen::Index i = 0; i < ad; ++i)
        if (!(in >> (*e.traj.actions)(i, t))) throw ContractError("buffer stream: truncated");
    }
    b.heap_.push_back(std::move(e));
  }
  if (!b.heap_property_holds()) std::make_heap(b.heap_.begin(), b.heap_.end(), later);
  return b;
}

void save_buffer(const PriorityBuffer& buffer, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ContractError("cannot write " + path.string());
  buffer.save(out);
}

PriorityBuffer load_buffer(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot read buffer " + path.string());
  return PriorityBuffer::load(in);
}

}  // namespace i2l::buffer
