#pragma once

#include <vector>

#include "ocl/matrix.hpp"

namespace ocl {

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_at_b(const Matrix& a, const Matrix& b);  // a^T * b
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);  // a * b^T
Matrix transpose(const Matrix& m);

Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scaled(const Matrix& a, double s);
void add_scaled_identity(Matrix& m, double s);  // m += s*I, throws NotSquare

/// Kronecker product. Entry ((i*b.rows+k),(j*b.cols+l)) = a(i,j)*b(k,l).
Matrix kron(const Matrix& a, const Matrix& b);

/// Sum of diagonal entries. Throws NotSquare.
double trace(const Matrix& m);

/// Lower Cholesky factor of a symmetric positive definite matrix.
/// Only the lower triangle of m is read. Throws NotPositiveDefinite when a
/// pivot is non-positive or non-finite.
Matrix cholesky_lower(const Matrix& m);

/// Inverse of a symmetric positive definite matrix via Cholesky.
/// Damping is the caller's job: failure surfaces as NotPositiveDefinite.
Matrix invert_spd(const Matrix& m);

/// Solve f * x = g for SPD f; g may have multiple columns.
Matrix solve_dense(const Matrix& f, const Matrix& g);

double dot(const std::vector<double>& a, const std::vector<double>& b);
double norm2(const std::vector<double>& a);
Matrix outer(const std::vector<double>& u, const std::vector<double>& v);

}  // namespace ocl
