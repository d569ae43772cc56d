#include "ocl/matrix.hpp"

#include <cmath>
#include <cstring>

#include "ocl/errors.hpp"

namespace ocl {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) {
      throw ShapeMismatch("matrix initializer rows have unequal lengths");
    }
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::vector<double> Matrix::row(std::size_t r) const {
  return std::vector<double>(row_ptr(r), row_ptr(r) + cols_);
}

void Matrix::set_row(std::size_t r, const std::vector<double>& values) {
  if (values.size() != cols_) {
    throw ShapeMismatch("set_row: value count does not match column count");
  }
  std::memcpy(row_ptr(r), values.data(), cols_ * sizeof(double));
}

bool Matrix::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace ocl
