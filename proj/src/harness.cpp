#include "ocl/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <string>

#include "ocl/errors.hpp"
#include "ocl/linalg.hpp"
#include "ocl/optim.hpp"
#include "ocl/tricks.hpp"

namespace ocl {

SeedEnvironment build_seed_environment(const ExperimentConfig& cfg, std::uint64_t seed) {
  const Rng root(seed);
  SeedEnvironment env;

  if (!cfg.stream.dataset_path.empty()) {
    env.dataset = load_dataset(cfg.stream.dataset_path);
  } else {
    Rng data_rng = root.child(kSeedTagDataset);
    env.dataset = make_synthetic(cfg.stream.synthetic_classes, cfg.stream.synthetic_per_class,
                                 cfg.stream.synthetic_dim, cfg.stream.synthetic_separation,
                                 data_rng);
  }

  if (cfg.stream.kind == TaskKind::class_incremental) {
    Rng split_rng = root.child(kSeedTagClassSplit);
    env.spec = split_class_incremental(env.dataset, cfg.stream.num_tasks,
                                       cfg.stream.classes_per_task, split_rng);
  } else {
    env.spec.kind = TaskKind::domain_incremental;
    env.spec.transform = cfg.stream.transform;
    std::vector<double> schedule = domain_schedule(cfg.stream.transform);
    schedule.resize(cfg.stream.num_tasks);
    env.spec.strengths = std::move(schedule);
    env.spec.image_width = cfg.stream.image_width;
  }
  env.spec.batch_size = cfg.batch_size;

  env.tasks = build_tasks(env.dataset, env.spec, root.child(kSeedTagStream));

  // Hold out test_fraction of each task, deterministically in the seed.
  const Rng test_root = root.child(kSeedTagTestSplit);
  env.train_rows.resize(env.tasks.size());
  env.test_rows.resize(env.tasks.size());
  for (std::size_t t = 0; t < env.tasks.size(); ++t) {
    const std::size_t n = env.tasks[t].size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng task_rng = test_root.child(t);
    task_rng.shuffle(order);
    const std::size_t n_test = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(cfg.test_fraction * static_cast<double>(n))));
    if (n_test >= n) {
      throw MissingSplit("task " + std::to_string(t) + " is too small to hold out " +
                         std::to_string(n_test) + " test examples");
    }
    env.test_rows[t].assign(order.begin(), order.begin() + n_test);
    env.train_rows[t].assign(order.begin() + n_test, order.end());
  }
  return env;
}

std::vector<double> evaluate_task_accuracies(const Network& net,
                                             const std::vector<TaskData>& tasks,
                                             const std::vector<std::vector<std::size_t>>& test_rows,
                                             std::size_t upto_task,
                                             const ReplayBuffer* ncm_buffer) {
  if (upto_task >= tasks.size() || test_rows.size() != tasks.size()) {
    throw MissingSplit("evaluate_task_accuracies: task index out of range");
  }

  Matrix prototypes;
  std::vector<int> proto_classes;
  if (ncm_buffer != nullptr) {
    const PrototypeTable table = build_prototypes(*ncm_buffer, net);
    prototypes = table.as_matrix(proto_classes);
  }

  std::vector<double> row;
  for (std::size_t j = 0; j <= upto_task; ++j) {
    if (test_rows[j].empty()) {
      throw MissingSplit("task " + std::to_string(j) + " has no held-out split");
    }
    Matrix x(test_rows[j].size(), tasks[j].x.cols());
    std::vector<int> y(test_rows[j].size());
    for (std::size_t i = 0; i < test_rows[j].size(); ++i) {
      x.set_row(i, tasks[j].x.row(test_rows[j][i]));
      y[i] = tasks[j].labels[test_rows[j][i]];
    }
    const ForwardResult f = forward(net, x);
    std::vector<int> pred;
    if (ncm_buffer != nullptr) {
      const std::vector<int> rows = nearest_mean_predict(f.features, prototypes);
      pred.resize(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) pred[i] = proto_classes[rows[i]];
    } else {
      pred = argmax_rows(f.logits);
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (pred[i] == y[i]) ++correct;
    }
    row.push_back(static_cast<double>(correct) / static_cast<double>(y.size()));
  }
  return row;
}

namespace {

std::set<int> unique_labels(const std::vector<int>& labels) {
  return std::set<int>(labels.begin(), labels.end());
}

/// One seed's training state and method/trick/optimizer dispatch.
class Trainer {
 public:
  Trainer(const ExperimentConfig& cfg, const SeedEnvironment& env, std::uint64_t seed)
      : cfg_(cfg),
        env_(env),
        buffer_(cfg.uses_buffer() ? cfg.buffer_capacity : 1),
        train_rng_(Rng(seed).child(kSeedTagTrain)) {
    Rng init_rng = Rng(seed).child(kSeedTagInit);
    std::vector<std::size_t> dims;
    dims.push_back(env.dataset.features.cols());
    dims.insert(dims.end(), cfg.hidden_dims.begin(), cfg.hidden_dims.end());
    dims.push_back(static_cast<std::size_t>(env.dataset.num_classes));
    net_ = Network::glorot(dims, init_rng);
    kfac_states_.resize(net_.layers().size());
    strategy_.kind = method_to_strategy(cfg.method);
    strategy_.mir_candidate_count = cfg.mir_candidates;
    strategy_.gss_ref_count = cfg.gss_refs;
    strategy_.replay_batch = cfg.effective_replay_batch();
  }

  const Network& net() const { return net_; }
  Network& net() { return net_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  Rng& train_rng() { return train_rng_; }
  std::uint64_t examples_seen() const { return examples_seen_; }
  std::vector<DiagnosticRow> take_diagnostics() { return std::move(diagnostics_); }
  std::vector<BufferEntry> buffer_entries() const { return buffer_.entries(); }

  void begin_task(std::size_t task_index) {
    if (task_index > 0) {
      const auto& labels = env_.tasks[task_index - 1].labels;
      seen_classes_.insert(labels.begin(), labels.end());
    }
    current_classes_ = unique_labels(env_.tasks[task_index].labels);
    current_task_ = task_index;
  }

  void finish_task() {
    if (cfg_.trick == Trick::rv && !buffer_.empty()) {
      const std::size_t steps =
          cfg_.review_steps > 0
              ? cfg_.review_steps
              : review_one_pass_steps(buffer_, cfg_.review_quota_cap, cfg_.batch_size);
      review_finetune(net_, buffer_, steps, cfg_.effective_review_alpha(), cfg_.batch_size,
                      cfg_.review_quota_cap, train_rng_);
    }
  }

  void step(const StreamBatch& batch) {
    examples_seen_ += batch.labels.size();
    LabeledBatch stream_part{batch.x, batch.labels};

    switch (cfg_.method) {
      case Method::finetune:
      case Method::offline:
        train_on(stream_part);
        break;
      case Method::er:
      case Method::gss: {
        LabeledBatch combined = stream_part;
        if (!buffer_.empty()) {
          combined = concat(stream_part,
                            buffer_.sample_uniform(strategy_.replay_batch, train_rng_));
        }
        train_on(combined);
        insert_examples(batch);
        break;
      }
      case Method::mir: {
        if (buffer_.empty()) {
          train_on(stream_part);
        } else {
          ForwardResult f = forward(net_, stream_part.x);
          const LossOutput loss = trick_loss(f.logits, stream_part.labels);
          const std::vector<Matrix> grads_step = backward(net_, f.caches, loss.dlogits);
          const LabeledBatch retrieved =
              mir_retrieve(buffer_, net_, grads_step, strategy_, cfg_.alpha, train_rng_);
          train_on(concat(stream_part, retrieved));
        }
        insert_examples(batch);
        break;
      }
      case Method::agem: {
        ForwardResult f = forward(net_, stream_part.x);
        const LossOutput loss = trick_loss(f.logits, stream_part.labels);
        std::vector<Matrix> grads = backward(net_, f.caches, loss.dlogits);
        if (!buffer_.empty()) {
          const LabeledBatch ref_batch =
              buffer_.sample_uniform(strategy_.replay_batch, train_rng_);
          ForwardResult fr = forward(net_, ref_batch.x);
          const LossOutput ref_loss = trick_loss(fr.logits, ref_batch.labels);
          const std::vector<Matrix> ref_grads = backward(net_, fr.caches, ref_loss.dlogits);
          const std::vector<double> projected =
              agem_project(flatten_grads(grads), flatten_grads(ref_grads));
          grads = unflatten_grads(projected, grads);
        }
        optimizer_step(f.caches, grads, loss.loss);
        insert_examples(batch);
        break;
      }
    }
    ++step_count_;
  }

 private:
  static Strategy method_to_strategy(Method m) {
    switch (m) {
      case Method::agem: return Strategy::agem;
      case Method::mir: return Strategy::mir;
      case Method::gss: return Strategy::gss;
      default: return Strategy::er;
    }
  }

  LossOutput trick_loss(const Matrix& logits, const std::vector<int>& labels) const {
    switch (cfg_.trick) {
      case Trick::lb:
        return labels_trick_loss(logits, labels, unique_labels(labels));
      case Trick::ss: {
        ClassPartition part;
        part.old_classes = seen_classes_;
        for (int c : current_classes_) {
          if (!seen_classes_.count(c)) part.new_classes.insert(c);
        }
        return separated_softmax_loss(logits, labels, part);
      }
      default:
        return cross_entropy(logits, labels);
    }
  }

  void train_on(const LabeledBatch& batch) {
    ForwardResult f = forward(net_, batch.x);
    const LossOutput loss = trick_loss(f.logits, batch.labels);
    const std::vector<Matrix> grads = backward(net_, f.caches, loss.dlogits);
    optimizer_step(f.caches, grads, loss.loss);
  }

  void optimizer_step(std::vector<LayerCache>& caches, const std::vector<Matrix>& grads,
                      double loss_now) {
    if (cfg_.optimizer == OptimizerKind::sgd || cfg_.method == Method::offline) {
      sgd_step(net_, grads, SgdConfig{cfg_.alpha});
      return;
    }
    const KfacConfig kcfg{cfg_.alpha, cfg_.lambda, cfg_.rho};
    for (std::size_t l = 0; l < kfac_states_.size(); ++l) {
      update_factors(kfac_states_[l], caches[l], kcfg);
      damp_and_invert(kfac_states_[l], cfg_.lambda);
    }
    if (cfg_.diagnostics) {
      std::vector<Matrix> delta;
      delta.reserve(grads.size());
      for (std::size_t l = 0; l < grads.size(); ++l) {
        delta.push_back(scaled(matmul(kfac_states_[l].b_damped_inv,
                                      matmul(grads[l], kfac_states_[l].a_damped_inv)),
                               -cfg_.alpha));
      }
      diagnostics_.push_back(DiagnosticRow{
          step_count_, current_task_, loss_now,
          quadratic_model_value(grads, kfac_states_, delta, loss_now, cfg_.lambda)});
    }
    kfac_step(net_, grads, kfac_states_, kcfg);
  }

  void insert_examples(const StreamBatch& batch) {
    for (std::size_t i = 0; i < batch.labels.size(); ++i) {
      if (cfg_.method == Method::gss) {
        buffer_.gss_insert(batch.x.row(i), batch.labels[i], net_, strategy_, train_rng_);
      } else {
        buffer_.reservoir_insert(batch.x.row(i), batch.labels[i], train_rng_);
      }
    }
  }

  const ExperimentConfig& cfg_;
  const SeedEnvironment& env_;
  Network net_;
  std::vector<KfacLayerState> kfac_states_;
  ReplayBuffer buffer_;
  StrategyConfig strategy_;
  Rng train_rng_;
  std::set<int> seen_classes_;
  std::set<int> current_classes_;
  std::size_t current_task_ = 0;
  std::size_t step_count_ = 0;
  std::uint64_t examples_seen_ = 0;
  std::vector<DiagnosticRow> diagnostics_;
};

SeedResult run_offline_seed(const ExperimentConfig& cfg, const SeedEnvironment& env,
                            Trainer& trainer, std::uint64_t seed) {
  SeedResult result;
  result.seed = seed;
  const std::size_t num_tasks = env.tasks.size();
  result.matrix = AccuracyMatrix(num_tasks);

  // Shuffled union of every task's training rows, revisited each epoch.
  std::vector<std::pair<std::size_t, std::size_t>> pool;  // (task, row)
  for (std::size_t t = 0; t < num_tasks; ++t) {
    for (std::size_t r : env.train_rows[t]) pool.emplace_back(t, r);
  }
  const std::size_t dim = env.dataset.features.cols();

  // Row i of the accuracy table is evaluated at an epoch checkpoint so the
  // table is fully populated by the end of training.
  std::vector<std::size_t> checkpoint(num_tasks);
  for (std::size_t i = 0; i < num_tasks; ++i) {
    checkpoint[i] = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(
               static_cast<double>((i + 1) * cfg.offline_epochs) / num_tasks)));
  }

  for (std::size_t epoch = 1; epoch <= cfg.offline_epochs; ++epoch) {
    trainer.train_rng().shuffle(pool);
    for (std::size_t i = 0; i < pool.size(); i += cfg.offline_batch) {
      const std::size_t count = std::min(cfg.offline_batch, pool.size() - i);
      StreamBatch batch;
      batch.x = Matrix(count, dim);
      batch.labels.resize(count);
      for (std::size_t j = 0; j < count; ++j) {
        const auto [t, r] = pool[i + j];
        batch.x.set_row(j, env.tasks[t].x.row(r));
        batch.labels[j] = env.tasks[t].labels[r];
      }
      trainer.step(batch);
    }
    for (std::size_t i = 0; i < num_tasks; ++i) {
      if (checkpoint[i] == epoch) {
        result.matrix.set_row(
            i, evaluate_task_accuracies(trainer.net(), env.tasks, env.test_rows, i, nullptr));
      }
    }
  }
  result.examples_seen = trainer.examples_seen();
  return result;
}

}  // namespace

SeedResult run_single_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  const SeedEnvironment env = build_seed_environment(cfg, seed);
  Trainer trainer(cfg, env, seed);
  SeedResult result;

  if (cfg.method == Method::offline) {
    trainer.begin_task(0);
    result = run_offline_seed(cfg, env, trainer, seed);
  } else {
    result.seed = seed;
    const std::vector<StreamBatch> batches =
        stream_batches_from(env.tasks, env.train_rows, cfg.batch_size,
                            Rng(seed).child(kSeedTagStream));
    result.matrix = AccuracyMatrix(env.tasks.size());
    std::size_t current_task = 0;
    trainer.begin_task(0);
    const ReplayBuffer* ncm = cfg.trick == Trick::ncm ? &trainer.buffer() : nullptr;
    for (const StreamBatch& batch : batches) {
      if (batch.task_index != current_task) {
        trainer.finish_task();
        result.matrix.set_row(current_task,
                              evaluate_task_accuracies(trainer.net(), env.tasks,
                                                       env.test_rows, current_task, ncm));
        current_task = batch.task_index;
        trainer.begin_task(current_task);
      }
      trainer.step(batch);
    }
    trainer.finish_task();
    result.matrix.set_row(current_task,
                          evaluate_task_accuracies(trainer.net(), env.tasks, env.test_rows,
                                                   current_task, ncm));
    result.examples_seen = trainer.examples_seen();
  }

  const std::size_t last = env.tasks.size() - 1;
  result.end_average_accuracy = average_accuracy(result.matrix, last);
  result.average_forgetting = last >= 1 ? average_forgetting(result.matrix, last) : 0.0;
  result.diagnostics = trainer.take_diagnostics();
  if (cfg.dump_buffer && cfg.uses_buffer()) {
    result.final_buffer = trainer.buffer_entries();
    result.num_classes = env.dataset.num_classes;
  }
  return result;
}

namespace {

void mean_std(const std::vector<double>& values, double& mean, double& std_dev) {
  mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  std_dev = 0.0;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    std_dev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  RunResult result;
  std::vector<double> accuracies;
  std::vector<double> forgettings;
  for (std::uint64_t seed : cfg.seeds) {
    // A failed seed aborts the whole experiment: partial aggregation would
    // silently bias the reported mean and deviation.
    result.per_seed.push_back(run_single_seed(cfg, seed));
    accuracies.push_back(result.per_seed.back().end_average_accuracy);
    forgettings.push_back(result.per_seed.back().average_forgetting);
  }
  mean_std(accuracies, result.mean_accuracy, result.std_accuracy);
  mean_std(forgettings, result.mean_forgetting, result.std_forgetting);
  return result;
}

SweepReport sweep(const ExperimentConfig& base, const SweepAxes& axes) {
  const std::vector<double> lambdas =
      axes.lambdas.empty() ? std::vector<double>{base.lambda} : axes.lambdas;
  const std::vector<std::size_t> buffers = axes.buffer_capacities.empty()
                                               ? std::vector<std::size_t>{base.buffer_capacity}
                                               : axes.buffer_capacities;
  const std::vector<Method> methods =
      axes.methods.empty() ? std::vector<Method>{base.method} : axes.methods;
  const std::vector<Trick> tricks =
      axes.tricks.empty() ? std::vector<Trick>{base.trick} : axes.tricks;

  std::set<std::string> keys;
  SweepReport report;
  for (Method m : methods) {
    for (Trick t : tricks) {
      for (double lam : lambdas) {
        for (std::size_t buf : buffers) {
          char key[128];
          std::snprintf(key, sizeof(key), "%s|%s|%.17g|%zu", to_string(m), to_string(t),
                        lam, buf);
          if (!keys.insert(key).second) {
            throw DuplicateCell("sweep cell repeated: " + std::string(key));
          }
          ExperimentConfig cfg = base;
          cfg.method = m;
          cfg.trick = t;
          cfg.lambda = lam;
          cfg.buffer_capacity = buf;
          report.cells.push_back(SweepCell{cfg, run_experiment(cfg)});
        }
      }
    }
  }
  return report;
}

}  // namespace ocl
