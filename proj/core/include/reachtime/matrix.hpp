#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <vector>

#include "reachtime/errors.hpp"

namespace reachtime {

using Vec = std::vector<double>;

// Dense row-major matrix. Every problem in this library is tiny (order <= ~10),
// so the kernels below are straightforward O(n^3) routines chosen for
// determinism and reproducibility rather than speed.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);  // zero-filled
  Matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> entries);

  static Matrix identity(std::size_t n);
  static Matrix diag(const Vec& d);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  Matrix transpose() const;
  double trace() const;
  double frobenius_norm() const;
  double max_abs() const;
  bool all_finite() const;

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(double s);

  Vec apply(const Vec& x) const;  // A x

  const Vec& data() const { return a_; }
  Vec& data() { return a_; }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  Vec a_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(double s, Matrix a);
Matrix operator*(Matrix a, double s);

/// Adds `sub` into `dst` with top-left corner at (r0, c0).
void place_block(Matrix& dst, const Matrix& sub, std::size_t r0, std::size_t c0);

// Symmetric matrix. Construction symmetrizes (a + a^T)/2, which absorbs
// floating-point drift from block assembly; input that is asymmetric beyond
// round-off (relative 1e-6) is rejected as a caller bug.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Matrix& a);

  static SymMatrix identity(std::size_t n);
  static SymMatrix diag(const Vec& d);

  std::size_t order() const { return m_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  const Matrix& mat() const { return m_; }

  double trace() const { return m_.trace(); }
  double frobenius_norm() const { return m_.frobenius_norm(); }
  double max_abs() const { return m_.max_abs(); }

 private:
  Matrix m_;
};

/// Lower-triangular Cholesky factor L with L L^T = a, or nullopt when `a` is
/// not positive definite (a pivot falls at or below 1e-12 * trace/order).
std::optional<Matrix> cholesky_pd(const SymMatrix& a);

struct EigenDecomposition {
  Vec values;      // ascending
  Matrix vectors;  // orthonormal eigenvectors in columns, matching `values`
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
EigenDecomposition sym_eig(const SymMatrix& a);

double min_eig(const SymMatrix& a);
double max_eig(const SymMatrix& a);
double spectral_norm(const SymMatrix& a);  // max |eigenvalue|

struct InverseResult {
  Matrix inverse;
  double condition = 0.0;  // 1-norm condition estimate ||a||_1 ||a^{-1}||_1
  bool ill_conditioned = false;
};

/// Gauss-Jordan inverse with partial pivoting. Throws SingularMatrixError on an
/// exactly singular matrix; flags condition estimates above 1e12.
InverseResult inverse(const Matrix& a);

/// Determinant via LU with partial pivoting.
double determinant(const Matrix& a);

// small-vector helpers
double dot(const Vec& x, const Vec& y);
double norm2(const Vec& x);
double inf_norm(const Vec& x);

}  // namespace reachtime
