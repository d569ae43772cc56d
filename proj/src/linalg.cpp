#include "ocl/linalg.hpp"

#include <cmath>
#include <string>

#include "ocl/errors.hpp"

namespace ocl {

namespace {

std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeMismatch("matmul: " + shape_str(a) + " * " + shape_str(b));
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* out_row = out.row_ptr(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      const double* b_row = b.row_ptr(k);
      for (std::size_t j = 0; j < b.cols(); ++j) {
        out_row[j] += aik * b_row[j];
      }
    }
  }
  return out;
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw ShapeMismatch("matmul_at_b: " + shape_str(a) + "^T * " + shape_str(b));
  }
  Matrix out(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double* a_row = a.row_ptr(k);
    const double* b_row = b.row_ptr(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = a_row[i];
      double* out_row = out.row_ptr(i);
      for (std::size_t j = 0; j < b.cols(); ++j) {
        out_row[j] += aki * b_row[j];
      }
    }
  }
  return out;
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw ShapeMismatch("matmul_a_bt: " + shape_str(a) + " * " + shape_str(b) + "^T");
  }
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* a_row = a.row_ptr(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* b_row = b.row_ptr(j);
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a_row[k] * b_row[k];
      out(i, j) = s;
    }
  }
  return out;
}

Matrix transpose(const Matrix& m) {
  Matrix out(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
  }
  return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) {
    throw ShapeMismatch("add: " + shape_str(a) + " vs " + shape_str(b));
  }
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
  return out;
}

Matrix sub(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) {
    throw ShapeMismatch("sub: " + shape_str(a) + " vs " + shape_str(b));
  }
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] -= b.data()[i];
  return out;
}

Matrix scaled(const Matrix& a, double s) {
  Matrix out = a;
  for (double& v : out.data()) v *= s;
  return out;
}

void add_scaled_identity(Matrix& m, double s) {
  if (m.rows() != m.cols()) {
    throw NotSquare("add_scaled_identity: matrix is " + shape_str(m));
  }
  for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) += s;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double aij = a(i, j);
      for (std::size_t k = 0; k < b.rows(); ++k) {
        double* out_row = out.row_ptr(i * b.rows() + k) + j * b.cols();
        const double* b_row = b.row_ptr(k);
        for (std::size_t l = 0; l < b.cols(); ++l) {
          out_row[l] = aij * b_row[l];
        }
      }
    }
  }
  return out;
}

double trace(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw NotSquare("trace: matrix is " + shape_str(m));
  }
  double t = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) t += m(i, i);
  return t;
}

Matrix cholesky_lower(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw NotSquare("cholesky: matrix is " + shape_str(m));
  }
  const std::size_t n = m.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!std::isfinite(d) || d <= 0.0) {
      throw NotPositiveDefinite("cholesky: pivot " + std::to_string(j) +
                                " is " + std::to_string(d));
    }
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

namespace {

// Solve L * L^T * x = rhs for one column, in place.
void cholesky_solve_column(const Matrix& l, std::vector<double>& x) {
  const std::size_t n = l.rows();
  for (std::size_t i = 0; i < n; ++i) {
    double s = x[i];
    const double* l_row = l.row_ptr(i);
    for (std::size_t k = 0; k < i; ++k) s -= l_row[k] * x[k];
    x[i] = s / l_row[i];
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = x[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
    x[ii] = s / l(ii, ii);
  }
}

}  // namespace

Matrix invert_spd(const Matrix& m) {
  const Matrix l = cholesky_lower(m);
  const std::size_t n = m.rows();
  Matrix inv(n, n);
  std::vector<double> col(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(col.begin(), col.end(), 0.0);
    col[j] = 1.0;
    cholesky_solve_column(l, col);
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
  }
  return inv;
}

Matrix solve_dense(const Matrix& f, const Matrix& g) {
  if (f.rows() != g.rows()) {
    throw ShapeMismatch("solve_dense: " + shape_str(f) + " vs rhs " + shape_str(g));
  }
  const Matrix l = cholesky_lower(f);
  Matrix x = g;
  std::vector<double> col(f.rows());
  for (std::size_t j = 0; j < g.cols(); ++j) {
    for (std::size_t i = 0; i < g.rows(); ++i) col[i] = g(i, j);
    cholesky_solve_column(l, col);
    for (std::size_t i = 0; i < g.rows(); ++i) x(i, j) = col[i];
  }
  return x;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw ShapeMismatch("dot: vector lengths " + std::to_string(a.size()) +
                        " vs " + std::to_string(b.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const std::vector<double>& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

Matrix outer(const std::vector<double>& u, const std::vector<double>& v) {
  Matrix out(u.size(), v.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    for (std::size_t j = 0; j < v.size(); ++j) out(i, j) = u[i] * v[j];
  }
  return out;
}

}  // namespace ocl
