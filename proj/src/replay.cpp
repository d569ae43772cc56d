#include "ocl/replay.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "ocl/errors.hpp"
#include "ocl/linalg.hpp"
#include "ocl/optim.hpp"

namespace ocl {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("replay buffer capacity must be positive");
  entries_.reserve(capacity);
}

void ReplayBuffer::reservoir_insert(const std::vector<double>& x, int label, Rng& rng) {
  seen_count_ += 1;
  if (entries_.size() < capacity_) {
    entries_.push_back(BufferEntry{x, label, 0.0});
    return;
  }
  const double keep_prob =
      static_cast<double>(capacity_) / static_cast<double>(seen_count_);
  if (rng.next_double() < keep_prob) {
    entries_[rng.uniform_index(capacity_)] = BufferEntry{x, label, 0.0};
  }
}

std::vector<std::size_t> ReplayBuffer::sample_uniform_indices(std::size_t k, Rng& rng) const {
  if (entries_.empty()) throw EmptyBuffer("sample_uniform: buffer is empty");
  if (k <= entries_.size()) {
    return rng.sample_indices(entries_.size(), k);
  }
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = rng.uniform_index(entries_.size());
  return idx;
}

LabeledBatch ReplayBuffer::gather(const std::vector<std::size_t>& indices) const {
  LabeledBatch out;
  if (indices.empty()) return out;
  out.x = Matrix(indices.size(), entries_.front().x.size());
  out.labels.resize(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.x.set_row(i, entries_[indices[i]].x);
    out.labels[i] = entries_[indices[i]].label;
  }
  return out;
}

LabeledBatch ReplayBuffer::sample_uniform(std::size_t k, Rng& rng) const {
  return gather(sample_uniform_indices(k, rng));
}

double gss_candidate_score(const std::vector<double>& cand,
                           const std::vector<std::vector<double>>& refs) {
  const double cand_norm = norm2(cand);
  double best = 0.0;
  bool first = true;
  for (const auto& ref : refs) {
    const double ref_norm = norm2(ref);
    double cosine = 0.0;
    if (cand_norm > 0.0 && ref_norm > 0.0) {
      cosine = dot(cand, ref) / (cand_norm * ref_norm);
    }
    if (first || cosine > best) {
      best = cosine;
      first = false;
    }
  }
  return first ? 0.0 : best;
}

void ReplayBuffer::gss_insert(const std::vector<double>& x, int label, const Network& net,
                              const StrategyConfig& cfg, Rng& rng) {
  seen_count_ += 1;
  double score = 0.0;
  if (!entries_.empty()) {
    Matrix xm(1, x.size());
    xm.set_row(0, x);
    const std::vector<double> cand_grad = flat_gradient(net, xm, {label});
    const std::vector<std::size_t> ref_idx =
        rng.sample_indices(entries_.size(), std::min(cfg.gss_ref_count, entries_.size()));
    std::vector<std::vector<double>> refs;
    refs.reserve(ref_idx.size());
    for (std::size_t i : ref_idx) {
      Matrix rm(1, entries_[i].x.size());
      rm.set_row(0, entries_[i].x);
      refs.push_back(flat_gradient(net, rm, {entries_[i].label}));
    }
    score = gss_candidate_score(cand_grad, refs);
  }
  if (entries_.size() < capacity_) {
    entries_.push_back(BufferEntry{x, label, score});
    return;
  }
  const std::size_t victim = rng.uniform_index(capacity_);
  if (score < entries_[victim].score) {
    entries_[victim] = BufferEntry{x, label, score};
  }
}

std::vector<double> agem_project(const std::vector<double>& g_new,
                                 const std::vector<double>& g_ref) {
  const double inner = dot(g_new, g_ref);
  if (inner >= 0.0) return g_new;
  const double ref_sq = dot(g_ref, g_ref);
  if (ref_sq < 1e-24) {  // |g_ref| < 1e-12
    std::cerr << "agem_project: reference gradient vanished, skipping projection\n";
    return g_new;
  }
  const double coeff = inner / ref_sq;
  std::vector<double> out = g_new;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= coeff * g_ref[i];
  return out;
}

namespace {

double sample_loss(const Network& net, const std::vector<double>& x, int label) {
  Matrix xm(1, x.size());
  xm.set_row(0, x);
  const ForwardResult f = forward(net, xm);
  return cross_entropy(f.logits, {label}).loss;
}

}  // namespace

LabeledBatch mir_retrieve(const ReplayBuffer& buf, const Network& net,
                          const std::vector<Matrix>& grads_step,
                          const StrategyConfig& cfg, double learning_rate, Rng& rng) {
  if (buf.empty()) throw EmptyBuffer("mir_retrieve: buffer is empty");

  std::vector<std::size_t> cand =
      buf.sample_uniform_indices(std::min(cfg.mir_candidate_count, buf.size()), rng);
  std::sort(cand.begin(), cand.end());

  Network scratch = net;
  sgd_step(scratch, grads_step, SgdConfig{learning_rate});

  struct Scored {
    std::size_t index;
    double score;
  };
  std::vector<Scored> scored;
  scored.reserve(cand.size());
  for (std::size_t i : cand) {
    const BufferEntry& e = buf.entries()[i];
    const double before = sample_loss(net, e.x, e.label);
    const double after = sample_loss(scratch, e.x, e.label);
    scored.push_back(Scored{i, after - before});
  }
  std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.index < b.index;
  });

  const std::size_t k = std::min(cfg.replay_batch, scored.size());
  std::vector<std::size_t> chosen(k);
  for (std::size_t i = 0; i < k; ++i) chosen[i] = scored[i].index;
  return buf.gather(chosen);
}

}  // namespace ocl
