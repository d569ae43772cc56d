#include "ocl/tricks.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ocl/errors.hpp"
#include "ocl/optim.hpp"

namespace ocl {

namespace {

// Restricted softmax cross entropy for one sample over the given columns.
// Adds the sample's contribution (scaled by inv_batch) to dlogits and
// returns its unscaled loss.
double masked_ce_row(const double* logits_row, int label, const std::vector<int>& cols,
                     double inv_batch, double* dlogits_row) {
  double m = logits_row[cols.front()];
  for (int c : cols) m = std::max(m, logits_row[c]);
  double sum = 0.0;
  for (int c : cols) sum += std::exp(logits_row[c] - m);
  const double lse = m + std::log(sum);
  for (int c : cols) {
    dlogits_row[c] += std::exp(logits_row[c] - lse) * inv_batch;
  }
  dlogits_row[label] -= inv_batch;
  return lse - logits_row[label];
}

std::vector<int> checked_columns(const std::set<int>& classes, std::size_t num_logits,
                                 const char* who) {
  std::vector<int> cols(classes.begin(), classes.end());
  for (int c : cols) {
    if (c < 0 || static_cast<std::size_t>(c) >= num_logits) {
      throw LabelOutOfRange(std::string(who) + ": class " + std::to_string(c) +
                            " outside the logit range");
    }
  }
  return cols;
}

}  // namespace

LossOutput labels_trick_loss(const Matrix& logits, const std::vector<int>& labels,
                             const std::set<int>& c_cur) {
  if (labels.size() != logits.rows()) {
    throw ShapeMismatch("labels_trick_loss: label count does not match batch");
  }
  if (c_cur.empty()) throw LabelNotInCur("labels_trick_loss: empty class set");
  const std::vector<int> cols = checked_columns(c_cur, logits.cols(), "labels_trick_loss");
  for (int y : labels) {
    if (!c_cur.count(y)) {
      throw LabelNotInCur("labels_trick_loss: label " + std::to_string(y) +
                          " not in the current class set");
    }
  }
  LossOutput out;
  out.dlogits = Matrix(logits.rows(), logits.cols());
  const double inv_batch = 1.0 / static_cast<double>(logits.rows());
  double loss = 0.0;
  for (std::size_t s = 0; s < logits.rows(); ++s) {
    loss += masked_ce_row(logits.row_ptr(s), labels[s], cols, inv_batch,
                          out.dlogits.row_ptr(s));
  }
  out.loss = loss * inv_batch;
  return out;
}

LossOutput separated_softmax_loss(const Matrix& logits, const std::vector<int>& labels,
                                  const ClassPartition& partition) {
  if (labels.size() != logits.rows()) {
    throw ShapeMismatch("separated_softmax_loss: label count does not match batch");
  }
  for (int c : partition.old_classes) {
    if (partition.new_classes.count(c)) {
      throw LabelUnpartitioned("separated_softmax_loss: class " + std::to_string(c) +
                               " is in both partitions");
    }
  }
  std::vector<int> old_cols;
  std::vector<int> new_cols;
  if (!partition.old_classes.empty()) {
    old_cols = checked_columns(partition.old_classes, logits.cols(), "separated_softmax_loss");
  }
  if (!partition.new_classes.empty()) {
    new_cols = checked_columns(partition.new_classes, logits.cols(), "separated_softmax_loss");
  }

  LossOutput out;
  out.dlogits = Matrix(logits.rows(), logits.cols());
  const double inv_batch = 1.0 / static_cast<double>(logits.rows());
  double loss = 0.0;
  for (std::size_t s = 0; s < logits.rows(); ++s) {
    const int y = labels[s];
    const std::vector<int>* cols = nullptr;
    if (partition.old_classes.count(y)) {
      cols = &old_cols;
    } else if (partition.new_classes.count(y)) {
      cols = &new_cols;
    } else {
      throw LabelUnpartitioned("separated_softmax_loss: label " + std::to_string(y) +
                               " is in neither partition");
    }
    loss += masked_ce_row(logits.row_ptr(s), y, *cols, inv_batch, out.dlogits.row_ptr(s));
  }
  out.loss = loss * inv_batch;
  return out;
}

Matrix PrototypeTable::as_matrix(std::vector<int>& class_order) const {
  class_order.clear();
  if (mean_by_class.empty()) {
    throw EmptyPrototypes("prototype table is empty");
  }
  Matrix m(mean_by_class.size(), mean_by_class.begin()->second.size());
  std::size_t r = 0;
  for (const auto& [label, mean] : mean_by_class) {
    class_order.push_back(label);
    m.set_row(r++, mean);
  }
  return m;
}

PrototypeTable build_prototypes(const ReplayBuffer& buf, const Network& net) {
  if (buf.empty()) throw EmptyBuffer("build_prototypes: buffer is empty");
  Matrix x(buf.size(), buf.entries().front().x.size());
  for (std::size_t i = 0; i < buf.size(); ++i) x.set_row(i, buf.entries()[i].x);
  const ForwardResult f = forward(net, x);

  PrototypeTable table;
  for (std::size_t i = 0; i < buf.size(); ++i) {
    const int y = buf.entries()[i].label;
    auto [it, inserted] =
        table.mean_by_class.try_emplace(y, std::vector<double>(f.features.cols(), 0.0));
    const double* row = f.features.row_ptr(i);
    for (std::size_t c = 0; c < f.features.cols(); ++c) it->second[c] += row[c];
    table.count_by_class[y] += 1;
  }
  for (auto& [label, mean] : table.mean_by_class) {
    const double inv = 1.0 / static_cast<double>(table.count_by_class[label]);
    for (double& v : mean) v *= inv;
  }
  return table;
}

namespace {

// Per-class quota = min class count in the buffer, capped at quota_cap.
std::size_t balanced_quota(const ReplayBuffer& buf, std::size_t quota_cap) {
  std::map<int, std::size_t> counts;
  for (const BufferEntry& e : buf.entries()) counts[e.label] += 1;
  std::size_t quota = quota_cap;
  for (const auto& [label, n] : counts) quota = std::min(quota, n);
  return quota;
}

std::vector<std::size_t> balanced_subset(const ReplayBuffer& buf, std::size_t quota_cap,
                                         Rng& rng) {
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < buf.size(); ++i) {
    by_class[buf.entries()[i].label].push_back(i);
  }
  const std::size_t quota = balanced_quota(buf, quota_cap);
  std::vector<std::size_t> subset;
  for (auto& [label, idx] : by_class) {
    rng.shuffle(idx);
    subset.insert(subset.end(), idx.begin(), idx.begin() + quota);
  }
  rng.shuffle(subset);
  return subset;
}

}  // namespace

std::size_t review_one_pass_steps(const ReplayBuffer& buf, std::size_t quota_cap,
                                  std::size_t batch_size) {
  if (buf.empty()) throw EmptyBuffer("review_one_pass_steps: buffer is empty");
  std::map<int, std::size_t> counts;
  for (const BufferEntry& e : buf.entries()) counts[e.label] += 1;
  const std::size_t subset = balanced_quota(buf, quota_cap) * counts.size();
  return (subset + batch_size - 1) / batch_size;
}

void review_finetune(Network& net, const ReplayBuffer& buf, std::size_t steps,
                     double alpha, std::size_t batch_size, std::size_t quota_cap,
                     Rng& rng) {
  if (buf.empty()) throw EmptyBuffer("review_finetune: buffer is empty");
  if (steps == 0) return;

  const std::vector<std::size_t> subset = balanced_subset(buf, quota_cap, rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < subset.size(); i += batch_size) {
    batches.emplace_back(subset.begin() + i,
                         subset.begin() + std::min(i + batch_size, subset.size()));
  }
  const SgdConfig sgd{alpha};
  for (std::size_t step = 0; step < steps; ++step) {
    const LabeledBatch batch = buf.gather(batches[step % batches.size()]);
    ForwardResult f = forward(net, batch.x);
    LossOutput loss = cross_entropy(f.logits, batch.labels);
    const std::vector<Matrix> grads = backward(net, f.caches, loss.dlogits);
    sgd_step(net, grads, sgd);
  }
}

}  // namespace ocl
