#pragma once

// Internal helpers shared by the vsc/uvc program builders. Not installed.

#include <cstddef>
#include <vector>

#include "reachtime/matrix.hpp"
#include "reachtime/sdp.hpp"

namespace reachtime::detail {

// Strictness margin: paper-strict "< 0" blocks become "<= -eps I". Flat so
// that large constants (alpha_u^2 up to 1e6) do not inflate the margin into
// the optimum.
inline constexpr double kStrictEps = 1e-6;
inline constexpr double kVarFloor = 1e-9;

inline Matrix elementary(std::size_t n, std::size_t i, std::size_t j) {
  Matrix e(n, n);
  e(i, j) = 1.0;
  return e;
}

// n x n matrix whose column `col` is column `a` of B.
inline Matrix column_into(const Matrix& b, std::size_t a, std::size_t col, std::size_t n) {
  Matrix t(n, n);
  for (std::size_t r = 0; r < n; ++r) t(r, col) = b(r, a);
  return t;
}

inline ConstraintBlock scalar_floor(std::size_t var_count, std::size_t var, double lo) {
  Matrix c(1, 1);
  c(0, 0) = -lo;
  Matrix one(1, 1);
  one(0, 0) = 1.0;
  ConstraintBlock blk;
  blk.constant = SymMatrix(c);
  blk.coefficients.assign(var_count, SymMatrix());
  blk.coefficients[var] = SymMatrix(one);
  return blk;
}

inline ConstraintBlock scalar_ceiling(std::size_t var_count, std::size_t var, double hi) {
  Matrix c(1, 1);
  c(0, 0) = hi;
  Matrix negone(1, 1);
  negone(0, 0) = -1.0;
  ConstraintBlock blk;
  blk.constant = SymMatrix(c);
  blk.coefficients.assign(var_count, SymMatrix());
  blk.coefficients[var] = SymMatrix(negone);
  return blk;
}

// [[alpha^2 I_m, Y], [Y^T, Z]] - eps I >= 0 with Z spanned by `zbasis`.
inline ConstraintBlock control_budget_block(std::size_t var_count, std::size_t n,
                                            std::size_t m, double alpha, std::size_t y0,
                                            const std::vector<std::size_t>& zvars,
                                            const std::vector<Matrix>& zbasis) {
  const std::size_t sz = m + n;
  Matrix c(sz, sz);
  for (std::size_t a = 0; a < m; ++a) c(a, a) = alpha * alpha;
  for (std::size_t i = 0; i < sz; ++i) c(i, i) -= kStrictEps;

  ConstraintBlock blk;
  blk.constant = SymMatrix(c);
  blk.coefficients.assign(var_count, SymMatrix());
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      Matrix co(sz, sz);
      co(a, m + b) = 1.0;
      co(m + b, a) = 1.0;
      blk.coefficients[y0 + a * n + b] = SymMatrix(co);
    }
  for (std::size_t t = 0; t < zvars.size(); ++t) {
    Matrix co(sz, sz);
    place_block(co, zbasis[t], m, m);
    blk.coefficients[zvars[t]] = SymMatrix(co);
  }
  return blk;
}

// [[theta, lead^T], [lead, Z]] - eps I >= 0.
inline ConstraintBlock reaching_block(std::size_t var_count, std::size_t n, const Vec& lead,
                                      std::size_t theta_var,
                                      const std::vector<std::size_t>& zvars,
                                      const std::vector<Matrix>& zbasis) {
  const std::size_t sz = n + 1;
  Matrix c(sz, sz);
  for (std::size_t j = 0; j < n; ++j) {
    c(0, 1 + j) = lead[j];
    c(1 + j, 0) = lead[j];
  }
  for (std::size_t i = 0; i < sz; ++i) c(i, i) -= kStrictEps;

  ConstraintBlock blk;
  blk.constant = SymMatrix(c);
  blk.coefficients.assign(var_count, SymMatrix());
  Matrix th(sz, sz);
  th(0, 0) = 1.0;
  blk.coefficients[theta_var] = SymMatrix(th);
  for (std::size_t t = 0; t < zvars.size(); ++t) {
    Matrix co(sz, sz);
    place_block(co, zbasis[t], 1, 1);
    blk.coefficients[zvars[t]] = SymMatrix(co);
  }
  return blk;
}

}  // namespace reachtime::detail
