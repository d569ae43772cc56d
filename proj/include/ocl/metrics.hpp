#pragma once

#include <cstddef>
#include <vector>

namespace ocl {

/// Lower-triangular accuracy table: entry (i, j) with j <= i is the test
/// accuracy on task j after learning task i (0-based task indices).
class AccuracyMatrix {
 public:
  AccuracyMatrix() = default;
  explicit AccuracyMatrix(std::size_t num_tasks) : rows_(num_tasks) {}

  std::size_t num_tasks() const { return rows_.size(); }

  void set_row(std::size_t i, std::vector<double> values);
  const std::vector<double>& row(std::size_t i) const;
  double at(std::size_t i, std::size_t j) const;
  bool row_complete(std::size_t i) const;

  bool operator==(const AccuracyMatrix& other) const { return rows_ == other.rows_; }

 private:
  std::vector<std::vector<double>> rows_;  // row i holds i + 1 entries
};

/// Mean of row i: (1 / (i+1)) * sum_j a(i, j). Throws IncompleteRow.
double average_accuracy(const AccuracyMatrix& m, std::size_t i);

/// Mean over j < i of max(0, best accuracy ever achieved on task j before
/// task i minus a(i, j)). Requires i >= 1 (TooFewTasks otherwise). The
/// per-task terms are clamped at zero so streams that only improve report
/// zero forgetting.
double average_forgetting(const AccuracyMatrix& m, std::size_t i);

}  // namespace ocl
