#pragma once

#include <vector>

#include "ocl/matrix.hpp"

namespace ocl {

/// A batch of examples: one row per example plus integer class labels.
struct LabeledBatch {
  Matrix x;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }
};

LabeledBatch concat(const LabeledBatch& a, const LabeledBatch& b);

}  // namespace ocl
