#pragma once

#include <cstdint>
#include <vector>

#include "ocl/batch.hpp"
#include "ocl/network.hpp"
#include "ocl/rng.hpp"

namespace ocl {

enum class Strategy { er, agem, mir, gss };

struct StrategyConfig {
  Strategy kind = Strategy::er;
  std::size_t mir_candidate_count = 50;
  std::size_t gss_ref_count = 10;
  std::size_t replay_batch = 10;
};

struct BufferEntry {
  std::vector<double> x;
  int label = 0;
  double score = 0.0;  // gss: max cosine similarity at insertion time
};

/// Bounded store of (example, label) pairs. Reservoir insertion keeps every
/// offered example resident with probability capacity/seen_count.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::uint64_t seen_count() const { return seen_count_; }
  const std::vector<BufferEntry>& entries() const { return entries_; }

  void reservoir_insert(const std::vector<double>& x, int label, Rng& rng);

  /// k entries drawn uniformly without replacement (with replacement when
  /// k exceeds the current occupancy). Throws EmptyBuffer.
  LabeledBatch sample_uniform(std::size_t k, Rng& rng) const;
  std::vector<std::size_t> sample_uniform_indices(std::size_t k, Rng& rng) const;

  LabeledBatch gather(const std::vector<std::size_t>& indices) const;

  /// gss insertion: candidates scored by the maximum cosine similarity of
  /// their loss gradient against a random subset of stored gradients; a full
  /// buffer replaces a uniformly drawn victim only when the candidate scores
  /// lower (more diverse) than the victim.
  void gss_insert(const std::vector<double>& x, int label, const Network& net,
                  const StrategyConfig& cfg, Rng& rng);

 private:
  std::size_t capacity_;
  std::vector<BufferEntry> entries_;
  std::uint64_t seen_count_ = 0;
};

/// Project g_new so it does not conflict with the reference gradient:
/// returned unchanged when <g_new, g_ref> >= 0, otherwise the component
/// along g_ref is removed. A vanishing reference is logged and ignored.
std::vector<double> agem_project(const std::vector<double>& g_new,
                                 const std::vector<double>& g_ref);

/// Retrieve the replay_batch buffer entries whose loss increases the most
/// under a virtual step: candidates are sampled uniformly, a scratch copy of
/// the net takes one SGD step with grads_step, and candidates are ranked by
/// loss_after - loss_before (ties prefer the lower buffer index).
LabeledBatch mir_retrieve(const ReplayBuffer& buf, const Network& net,
                          const std::vector<Matrix>& grads_step,
                          const StrategyConfig& cfg, double learning_rate, Rng& rng);

/// Scoring helper shared with tests: max cosine similarity of cand against
/// the reference gradients (0 when there are none or a norm vanishes).
double gss_candidate_score(const std::vector<double>& cand,
                           const std::vector<std::vector<double>>& refs);

}  // namespace ocl
