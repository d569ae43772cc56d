#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ocl/replay.hpp"
#include "ocl/stream.hpp"

namespace ocl {

enum class Method { finetune, er, agem, mir, gss, offline };
enum class OptimizerKind { sgd, kfac };
enum class Trick { none, lb, ss, rv, ncm };

struct StreamConfig {
  std::string dataset_path;  // empty -> synthetic
  std::size_t synthetic_classes = 20;
  std::size_t synthetic_per_class = 100;
  std::size_t synthetic_dim = 20;
  double synthetic_separation = 6.0;

  TaskKind kind = TaskKind::class_incremental;
  std::size_t num_tasks = 10;
  std::size_t classes_per_task = 2;          // class-incremental
  TransformKind transform = TransformKind::noise;  // domain-incremental
  std::size_t image_width = 0;
};

struct ExperimentConfig {
  Method method = Method::er;
  OptimizerKind optimizer = OptimizerKind::sgd;
  Trick trick = Trick::none;

  std::size_t buffer_capacity = 200;
  double alpha = 0.1;
  double lambda = 1.0;
  double rho = 0.9;
  std::size_t batch_size = 10;
  std::vector<std::size_t> hidden_dims = {64};
  std::vector<std::uint64_t> seeds = {1};

  StreamConfig stream;
  double test_fraction = 0.2;

  std::size_t offline_epochs = 70;
  std::size_t offline_batch = 128;

  std::size_t replay_batch = 0;  // 0 -> batch_size
  std::size_t mir_candidates = 50;
  std::size_t gss_refs = 10;

  std::size_t review_steps = 0;  // 0 -> one pass over the balanced subset
  double review_alpha = 0.0;     // 0 -> alpha / 10
  std::size_t review_quota_cap = 50;

  bool allow_gss_oci = false;
  bool dump_buffer = false;
  bool diagnostics = false;

  std::size_t effective_replay_batch() const {
    return replay_batch == 0 ? batch_size : replay_batch;
  }
  double effective_review_alpha() const {
    return review_alpha > 0.0 ? review_alpha : alpha / 10.0;
  }
  bool uses_buffer() const {
    return method == Method::er || method == Method::agem || method == Method::mir ||
           method == Method::gss;
  }
};

/// Reject inconsistent configurations (gss on a class-incremental stream
/// without the override, buffer tricks on bufferless methods, ...).
void validate_config(const ExperimentConfig& cfg);

/// Flat key = value file; '#' starts a comment. Unknown keys are errors.
ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);
void apply_config_key(ExperimentConfig& cfg, const std::string& key,
                      const std::string& value, const std::string& origin);

/// Config echo in the same key = value syntax, with a fixed key order.
std::string config_echo(const ExperimentConfig& cfg);

const char* to_string(Method m);
const char* to_string(OptimizerKind o);
const char* to_string(Trick t);
const char* to_string(TaskKind k);
const char* to_string(TransformKind t);
Method method_from_string(const std::string& s);
OptimizerKind optimizer_from_string(const std::string& s);
Trick trick_from_string(const std::string& s);
TaskKind task_kind_from_string(const std::string& s);
TransformKind transform_from_string(const std::string& s);

std::vector<std::string> split_list(const std::string& s, char sep);

}  // namespace ocl
