#pragma once

#include <map>
#include <set>
#include <vector>

#include "ocl/network.hpp"
#include "ocl/replay.hpp"
#include "ocl/rng.hpp"

namespace ocl {

/// Disjoint old/new class sets used by the separated softmax.
struct ClassPartition {
  std::set<int> old_classes;
  std::set<int> new_classes;
};

/// Cross entropy restricted to the classes present in the mini-batch: the
/// softmax normalizes over c_cur only and dlogits is exactly zero on every
/// column outside c_cur.
LossOutput labels_trick_loss(const Matrix& logits, const std::vector<int>& labels,
                             const std::set<int>& c_cur);

/// Two independent softmax losses, one over the old-class columns and one
/// over the new-class columns; each sample contributes to the partition
/// holding its label and its gradient is zero on the other partition.
LossOutput separated_softmax_loss(const Matrix& logits, const std::vector<int>& labels,
                                  const ClassPartition& partition);

/// Per-class mean feature vectors, rebuilt from the buffer at evaluation
/// time. Classes absent from the buffer are omitted.
struct PrototypeTable {
  std::map<int, std::vector<double>> mean_by_class;
  std::map<int, std::size_t> count_by_class;

  /// Prototype matrix with one row per class in ascending label order,
  /// together with the row -> label mapping.
  Matrix as_matrix(std::vector<int>& class_order) const;
};

PrototypeTable build_prototypes(const ReplayBuffer& buf, const Network& net);

/// Number of SGD steps in one pass over the class-balanced subset.
std::size_t review_one_pass_steps(const ReplayBuffer& buf, std::size_t quota_cap,
                                  std::size_t batch_size);

/// Balanced fine-tune over the buffer: per-class quota = min class count
/// capped at quota_cap, shuffled, then `steps` SGD steps at rate alpha
/// cycling over the balanced batches. steps = 0 leaves the net unchanged.
void review_finetune(Network& net, const ReplayBuffer& buf, std::size_t steps,
                     double alpha, std::size_t batch_size, std::size_t quota_cap,
                     Rng& rng);

}  // namespace ocl
