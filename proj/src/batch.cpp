#include "ocl/batch.hpp"

#include <cstring>

#include "ocl/errors.hpp"

namespace ocl {

LabeledBatch concat(const LabeledBatch& a, const LabeledBatch& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  if (a.x.cols() != b.x.cols()) {
    throw ShapeMismatch("concat: feature widths differ");
  }
  LabeledBatch out;
  out.x = Matrix(a.x.rows() + b.x.rows(), a.x.cols());
  std::memcpy(out.x.data().data(), a.x.data().data(), a.x.size() * sizeof(double));
  std::memcpy(out.x.data().data() + a.x.size(), b.x.data().data(),
              b.x.size() * sizeof(double));
  out.labels = a.labels;
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  return out;
}

}  // namespace ocl
