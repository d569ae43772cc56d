#include "ocl/metrics.hpp"

#include <algorithm>
#include <string>

#include "ocl/errors.hpp"

namespace ocl {

void AccuracyMatrix::set_row(std::size_t i, std::vector<double> values) {
  if (i >= rows_.size()) {
    throw IncompleteRow("accuracy matrix row " + std::to_string(i) + " out of range");
  }
  if (values.size() != i + 1) {
    throw IncompleteRow("accuracy matrix row " + std::to_string(i) + " needs " +
                        std::to_string(i + 1) + " entries, got " +
                        std::to_string(values.size()));
  }
  rows_[i] = std::move(values);
}

const std::vector<double>& AccuracyMatrix::row(std::size_t i) const {
  if (i >= rows_.size() || rows_[i].size() != i + 1) {
    throw IncompleteRow("accuracy matrix row " + std::to_string(i) + " not populated");
  }
  return rows_[i];
}

double AccuracyMatrix::at(std::size_t i, std::size_t j) const {
  const std::vector<double>& r = row(i);
  if (j > i) throw IncompleteRow("accuracy matrix entry above the diagonal");
  return r[j];
}

bool AccuracyMatrix::row_complete(std::size_t i) const {
  return i < rows_.size() && rows_[i].size() == i + 1;
}

double average_accuracy(const AccuracyMatrix& m, std::size_t i) {
  const std::vector<double>& r = m.row(i);
  double sum = 0.0;
  for (double v : r) sum += v;
  return sum / static_cast<double>(r.size());
}

double average_forgetting(const AccuracyMatrix& m, std::size_t i) {
  if (i < 1) throw TooFewTasks("average_forgetting needs at least two tasks");
  for (std::size_t k = 0; k <= i; ++k) {
    if (!m.row_complete(k)) {
      throw IncompleteRow("average_forgetting: row " + std::to_string(k) +
                          " not populated");
    }
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < i; ++j) {
    double best = m.at(j, j);
    for (std::size_t l = j; l < i; ++l) best = std::max(best, m.at(l, j));
    sum += std::max(0.0, best - m.at(i, j));
  }
  return sum / static_cast<double>(i);
}

}  // namespace ocl
