#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ocl/config.hpp"
#include "ocl/metrics.hpp"
#include "ocl/network.hpp"
#include "ocl/replay.hpp"
#include "ocl/stream.hpp"

namespace ocl {

struct DiagnosticRow {
  std::size_t step;
  std::size_t task;
  double loss;
  double quadratic_model;
};

struct SeedResult {
  std::uint64_t seed = 0;
  AccuracyMatrix matrix;
  double end_average_accuracy = 0.0;
  double average_forgetting = 0.0;
  std::uint64_t examples_seen = 0;
  std::vector<DiagnosticRow> diagnostics;

  // populated when dump_buffer is set so reports can serialize the buffer
  std::vector<BufferEntry> final_buffer;
  int num_classes = 0;
};

struct RunResult {
  std::vector<SeedResult> per_seed;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;   // sample standard deviation (n - 1)
  double mean_forgetting = 0.0;
  double std_forgetting = 0.0;
};

/// The per-seed experiment environment: tasks (with transforms applied)
/// and the deterministic train/test row split.
struct SeedEnvironment {
  Dataset dataset;
  TaskSpec spec;
  std::vector<TaskData> tasks;
  std::vector<std::vector<std::size_t>> train_rows;
  std::vector<std::vector<std::size_t>> test_rows;
};

/// Build the stream environment for one seed. Depends only on the stream
/// configuration and the seed, never on method, optimizer or trick, so every
/// experiment cell sees the identical stream for a given seed.
SeedEnvironment build_seed_environment(const ExperimentConfig& cfg, std::uint64_t seed);

/// Accuracy on the held-out split of every task j <= upto_task. When
/// ncm_buffer is non-null, classification uses nearest-prototype features
/// instead of argmax logits.
std::vector<double> evaluate_task_accuracies(const Network& net,
                                             const std::vector<TaskData>& tasks,
                                             const std::vector<std::vector<std::size_t>>& test_rows,
                                             std::size_t upto_task,
                                             const ReplayBuffer* ncm_buffer);

SeedResult run_single_seed(const ExperimentConfig& cfg, std::uint64_t seed);

/// Run every configured seed (aborting the whole experiment if any seed
/// fails) and aggregate mean / standard deviation across seeds.
RunResult run_experiment(const ExperimentConfig& cfg);

struct SweepAxes {
  std::vector<double> lambdas;
  std::vector<std::size_t> buffer_capacities;
  std::vector<Method> methods;
  std::vector<Trick> tricks;
};

struct SweepCell {
  ExperimentConfig config;
  RunResult result;
};

struct SweepReport {
  std::vector<SweepCell> cells;
};

/// Cartesian product over the declared axes (an empty axis keeps the base
/// value). Duplicate cells are rejected.
SweepReport sweep(const ExperimentConfig& base, const SweepAxes& axes);

// Root-rng child tags used to derive the per-seed streams; fixed so tests
// can reconstruct any stage independently.
inline constexpr std::uint64_t kSeedTagDataset = 101;
inline constexpr std::uint64_t kSeedTagClassSplit = 102;
inline constexpr std::uint64_t kSeedTagStream = 103;
inline constexpr std::uint64_t kSeedTagTestSplit = 104;
inline constexpr std::uint64_t kSeedTagInit = 105;
inline constexpr std::uint64_t kSeedTagTrain = 106;

}  // namespace ocl
