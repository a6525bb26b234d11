#include "reachtime/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace reachtime {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw InvalidInputError(msg);
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), a_(rows * cols, 0.0) {
  require(rows >= 1 && cols >= 1, "matrix dimensions must be >= 1");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> entries)
    : Matrix(rows, cols) {
  require(entries.size() == rows * cols, "entry count must equal rows*cols");
  std::copy(entries.begin(), entries.end(), a_.begin());
  require(all_finite(), "matrix entries must be finite");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diag(const Vec& d) {
  require(!d.empty(), "diag needs at least one entry");
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  require(m.all_finite(), "matrix entries must be finite");
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  require(rows.size() >= 1, "need at least one row");
  const std::size_t nc = rows.begin()->size();
  Matrix m(rows.size(), nc);
  std::size_t i = 0;
  for (const auto& row : rows) {
    require(row.size() == nc, "ragged rows");
    std::size_t j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  require(m.all_finite(), "matrix entries must be finite");
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double Matrix::trace() const {
  double s = 0.0;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) s += (*this)(i, i);
  return s;
}

double Matrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : a_) s += v * v;
  return std::sqrt(s);
}

double Matrix::max_abs() const {
  double s = 0.0;
  for (double v : a_) s = std::max(s, std::abs(v));
  return s;
}

bool Matrix::all_finite() const {
  return std::all_of(a_.begin(), a_.end(), [](double v) { return std::isfinite(v); });
}

Matrix& Matrix::operator+=(const Matrix& o) {
  require(rows_ == o.rows_ && cols_ == o.cols_, "dimension mismatch in +=");
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  require(rows_ == o.rows_ && cols_ == o.cols_, "dimension mismatch in -=");
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : a_) v *= s;
  return *this;
}

Vec Matrix::apply(const Vec& x) const {
  require(x.size() == cols_, "dimension mismatch in apply");
  Vec y(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw InvalidInputError("dimension mismatch in matrix product");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Matrix operator*(double s, Matrix a) { return a *= s; }
Matrix operator*(Matrix a, double s) { return a *= s; }

void place_block(Matrix& dst, const Matrix& sub, std::size_t r0, std::size_t c0) {
  if (r0 + sub.rows() > dst.rows() || c0 + sub.cols() > dst.cols())
    throw InvalidInputError("place_block out of range");
  for (std::size_t i = 0; i < sub.rows(); ++i)
    for (std::size_t j = 0; j < sub.cols(); ++j) dst(r0 + i, c0 + j) += sub(i, j);
}

SymMatrix::SymMatrix(const Matrix& a) {
  if (a.rows() != a.cols()) throw InvalidInputError("SymMatrix needs a square matrix");
  if (!a.all_finite()) throw InvalidInputError("SymMatrix entries must be finite");
  const std::size_t n = a.rows();
  double asym = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      asym = std::max(asym, std::abs(a(i, j) - a(j, i)));
  if (asym > 1e-6 * std::max(1.0, a.max_abs()))
    throw InvalidInputError("matrix is asymmetric beyond round-off");
  m_ = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m_(i, i) = a(i, i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 0.5 * (a(i, j) + a(j, i));
      m_(i, j) = v;
      m_(j, i) = v;
    }
  }
}

SymMatrix SymMatrix::identity(std::size_t n) { return SymMatrix(Matrix::identity(n)); }
SymMatrix SymMatrix::diag(const Vec& d) { return SymMatrix(Matrix::diag(d)); }

std::optional<Matrix> cholesky_pd(const SymMatrix& a) {
  const std::size_t n = a.order();
  if (n == 0) throw InvalidInputError("cholesky_pd: empty matrix");
  // Pivot floor: positive-definite means every pivot clears a trace-scaled tolerance.
  const double floor = std::max(0.0, 1e-12 * a.trace() / static_cast<double>(n));
  Matrix L(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
    if (!(d > floor) || !(d > 0.0)) return std::nullopt;
    L(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      L(i, j) = s / L(j, j);
    }
  }
  return L;
}

EigenDecomposition sym_eig(const SymMatrix& input) {
  const std::size_t n = input.order();
  Matrix a = input.mat();
  Matrix v = Matrix::identity(n);

  auto off_norm = [&a, n]() {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
    return std::sqrt(2.0 * s);
  };

  const double scale = std::max(input.frobenius_norm(), 1e-300);
  const double tol = 1e-15 * scale;
  const int max_sweeps = 64;

  int sweep = 0;
  while (off_norm() > tol) {
    if (++sweep > max_sweeps)
      throw NumericalFailureError("sym_eig: Jacobi sweeps did not converge");
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-18 * scale) continue;
        // classic stable rotation: t = sign(theta)/(|theta| + sqrt(theta^2+1))
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&a](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

  EigenDecomposition out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a(order[j], order[j]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
  }
  return out;
}

double min_eig(const SymMatrix& a) { return sym_eig(a).values.front(); }
double max_eig(const SymMatrix& a) { return sym_eig(a).values.back(); }

double spectral_norm(const SymMatrix& a) {
  const auto e = sym_eig(a);
  return std::max(std::abs(e.values.front()), std::abs(e.values.back()));
}

InverseResult inverse(const Matrix& a) {
  if (a.rows() != a.cols()) throw InvalidInputError("inverse: matrix must be square");
  if (!a.all_finite()) throw InvalidInputError("inverse: entries must be finite");
  const std::size_t n = a.rows();

  auto one_norm = [n](const Matrix& m) {
    double best = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double col = 0.0;
      for (std::size_t i = 0; i < n; ++i) col += std::abs(m(i, j));
      best = std::max(best, col);
    }
    return best;
  };

  Matrix w = a;
  Matrix inv = Matrix::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    double best = std::abs(w(col, col));
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(w(r, col)) > best) {
        best = std::abs(w(r, col));
        piv = r;
      }
    }
    if (best == 0.0) throw SingularMatrixError("inverse: matrix is singular");
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(w(piv, j), w(col, j));
        std::swap(inv(piv, j), inv(col, j));
      }
    }
    const double d = w(col, col);
    for (std::size_t j = 0; j < n; ++j) {
      w(col, j) /= d;
      inv(col, j) /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = w(r, col);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        w(r, j) -= f * w(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }

  InverseResult out;
  out.condition = one_norm(a) * one_norm(inv);
  out.ill_conditioned = out.condition > 1e12;
  out.inverse = std::move(inv);
  return out;
}

double determinant(const Matrix& a) {
  if (a.rows() != a.cols()) throw InvalidInputError("determinant: matrix must be square");
  const std::size_t n = a.rows();
  Matrix w = a;
  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    double best = std::abs(w(col, col));
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(w(r, col)) > best) {
        best = std::abs(w(r, col));
        piv = r;
      }
    }
    if (best == 0.0) return 0.0;
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(w(piv, j), w(col, j));
      det = -det;
    }
    det *= w(col, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = w(r, col) / w(col, col);
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) w(r, j) -= f * w(col, j);
    }
  }
  return det;
}

double dot(const Vec& x, const Vec& y) {
  if (x.size() != y.size()) throw InvalidInputError("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(const Vec& x) { return std::sqrt(dot(x, x)); }

double inf_norm(const Vec& x) {
  double s = 0.0;
  for (double v : x) s = std::max(s, std::abs(v));
  return s;
}

}  // namespace reachtime
