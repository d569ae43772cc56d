#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ocl/matrix.hpp"
#include "ocl/rng.hpp"

namespace ocl {

struct Dataset {
  Matrix features;          // n x d
  std::vector<int> labels;  // values in [0, num_classes)
  int num_classes = 0;
};

/// "OCLD" file format: magic, version byte, u32 n, u32 d, u32 C, then
/// n*d little-endian f64 features and n little-endian u16 labels.
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

/// Gaussian clusters, one per class, unit covariance, centers at pairwise
/// distance >= separation (all at the origin when separation is zero).
Dataset make_synthetic(std::size_t classes, std::size_t per_class, std::size_t dim,
                       double separation, Rng& rng);

enum class TaskKind { class_incremental, domain_incremental };
enum class TransformKind { noise, occlusion, blur };

struct TaskSpec {
  TaskKind kind = TaskKind::class_incremental;
  std::vector<std::vector<int>> class_subsets;      // class-incremental
  TransformKind transform = TransformKind::noise;   // domain-incremental
  std::vector<double> strengths;                    // nondecreasing
  std::size_t batch_size = 10;
  std::size_t image_width = 0;  // geometry for occlusion/blur

  std::size_t num_tasks() const {
    return kind == TaskKind::class_incremental ? class_subsets.size() : strengths.size();
  }
};

/// Shuffle the class labels and partition them into num_tasks disjoint
/// subsets of classes_per_task each. Throws TooManyTasks when the dataset
/// has too few classes.
TaskSpec split_class_incremental(const Dataset& ds, std::size_t num_tasks,
                                 std::size_t classes_per_task, Rng& rng);

/// Fixed per-task strength schedules for the three nonstationarity kinds.
std::vector<double> domain_schedule(TransformKind kind);

/// noise: additive strength-scaled standard normal draws.
/// occlusion: zero a square whose side covers fraction `strength` of the
///   image side, at a uniform position per image.
/// blur: row-wise box filter of width 1 + round(2*strength), renormalized
///   at the borders.
/// Rows are flattened width x width single-channel images for occlusion and
/// blur; GeometryUnknown when image_width does not match.
Matrix apply_nonstationarity(const Matrix& x, TransformKind kind, double strength,
                             std::size_t image_width, Rng& rng);

struct StreamBatch {
  Matrix x;
  std::vector<int> labels;
  std::size_t task_index = 0;
  bool is_task_boundary = false;
};

/// One task's examples with any domain transform already applied.
struct TaskData {
  Matrix x;
  std::vector<int> labels;
  std::size_t size() const { return labels.size(); }
};

/// Assign dataset examples to tasks and apply the per-task transforms.
/// Derivation is deterministic in rng's seed: all draws go through child
/// streams keyed by documented tags, so the result is reproducible piecewise.
std::vector<TaskData> build_tasks(const Dataset& ds, const TaskSpec& spec, const Rng& rng);

/// Emit the selected rows of each task, shuffled once per task, in batches
/// of spec.batch_size (the last batch of a task may be short). The first
/// batch of each task carries is_task_boundary.
std::vector<StreamBatch> stream_batches_from(const std::vector<TaskData>& tasks,
                                             const std::vector<std::vector<std::size_t>>& rows,
                                             std::size_t batch_size, const Rng& rng);

/// Single-pass stream over every example of the dataset under spec.
std::vector<StreamBatch> stream_batches(const Dataset& ds, const TaskSpec& spec,
                                        const Rng& rng);

// Child-stream tags used by build_tasks / stream_batches_from.
inline constexpr std::uint64_t kStreamTagAssign = 1;
inline constexpr std::uint64_t kStreamTagShuffleBase = 100;
inline constexpr std::uint64_t kStreamTagTransformBase = 10000;

}  // namespace ocl
