#include "reachtime/uvc.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <map>

#include "lmi_util.hpp"

namespace reachtime {

using detail::kStrictEps;
using detail::kVarFloor;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Upper-triangle basis of a symmetric n x n matrix: S_pq = E_pq + E_qp (p < q)
// or E_pp, enumerated row-major.
std::vector<Matrix> sym_basis(std::size_t n) {
  std::vector<Matrix> basis;
  basis.reserve(n * (n + 1) / 2);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = p; q < n; ++q) {
      Matrix s(n, n);
      s(p, q) = 1.0;
      s(q, p) = 1.0;
      if (p == q) s(p, p) = 1.0;
      basis.push_back(s);
    }
  return basis;
}

SymMatrix unpack_sym(const Vec& x, std::size_t offset, std::size_t n) {
  Matrix z(n, n);
  std::size_t t = 0;
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = p; q < n; ++q) {
      z(p, q) = x[offset + t];
      z(q, p) = x[offset + t];
      ++t;
    }
  return SymMatrix(z);
}

// Generic log-space line search: coarse grid scan, then golden-section
// refinement bracketing the best grid point. The global best over every
// evaluation is returned, which also covers non-unimodal profiles.
struct LineSearchOutcome {
  bool any_feasible = false;
  double rho = 0.0;
  double value = kInf;
};

LineSearchOutcome minimize_over_rho(double lo, double hi, int grid_points,
                                    double rel_tol,
                                    const std::function<double(double)>& f) {
  if (!(lo > 0.0) || !(hi >= lo))
    throw InvalidInputError("rho range must satisfy 0 < lo <= hi");

  std::map<double, double> seen;
  auto eval = [&](double rho) {
    auto it = seen.find(rho);
    if (it != seen.end()) return it->second;
    const double v = f(rho);
    seen.emplace(rho, v);
    return v;
  };

  LineSearchOutcome out;
  auto consider = [&](double rho, double v) {
    if (v < out.value) {
      out.value = v;
      out.rho = rho;
      out.any_feasible = true;
    }
  };

  if (hi == lo) {
    const double v = eval(lo);
    if (v < kInf) consider(lo, v);
    return out;
  }

  const int g = std::max(grid_points, 2);
  const double ulo = std::log(lo), uhi = std::log(hi);
  std::vector<double> us(g), vs(g);
  int best = -1;
  for (int i = 0; i < g; ++i) {
    us[i] = ulo + (uhi - ulo) * static_cast<double>(i) / static_cast<double>(g - 1);
    const double rho = std::exp(us[i]);
    vs[i] = eval(rho);
    if (vs[i] < kInf) {
      consider(rho, vs[i]);
      if (best < 0 || vs[i] < vs[best]) best = i;
    }
  }
  if (best < 0) return out;

  double a = us[std::max(best - 1, 0)];
  double b = us[std::min(best + 1, g - 1)];
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = eval(std::exp(c));
  double fd = eval(std::exp(d));
  consider(std::exp(c), fc);
  consider(std::exp(d), fd);
  while (b - a > rel_tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = eval(std::exp(c));
      consider(std::exp(c), fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = eval(std::exp(d));
      consider(std::exp(d), fd);
    }
  }
  return out;
}

}  // namespace

LinearMatrixProgram build_uvc_inner(const PolytopicPlant& plant, const Vec& sigma0,
                                    double rho, std::optional<double> alpha_u) {
  const std::size_t n = plant.n, m = plant.m;
  if (!(rho > 0.0)) throw InvalidInputError("uvc: rho must be positive");
  if (sigma0.size() != n)
    throw InvalidInputError("uvc: sigma0 length must equal the state dimension");
  for (double v : sigma0)
    if (!std::isfinite(v)) throw InvalidInputError("uvc: sigma0 must be finite");
  if (alpha_u && !(*alpha_u > 0.0))
    throw InvalidInputError("uvc: alpha_u must be positive");

  const bool with_delta = plant.delta > 0.0;
  const double delta = plant.delta;
  const std::size_t nz = n * (n + 1) / 2;
  const std::size_t k = nz + m * n + 2;
  const std::size_t y0 = nz;
  const std::size_t mu_var = nz + m * n;
  const std::size_t theta_var = mu_var + 1;

  LinearMatrixProgram prog;
  prog.var_count = k;
  prog.objective.assign(k, 0.0);
  prog.objective[theta_var] = 1.0;

  const std::vector<Matrix> zbasis = sym_basis(n);
  std::vector<std::size_t> zvars(nz);
  for (std::size_t t = 0; t < nz; ++t) zvars[t] = t;

  // Vertex blocks. With delta = 0 the disturbance row/column drops and mu only
  // pads the leading block.
  const std::size_t sz = with_delta ? 3 * n : 2 * n;
  for (const Matrix& b : plant.vertices) {
    Matrix c(sz, sz);
    for (std::size_t j = 0; j < n; ++j) c(n + j, n + j) = rho;
    for (std::size_t i = 0; i < sz; ++i) c(i, i) -= kStrictEps;

    ConstraintBlock blk;
    blk.constant = SymMatrix(c);
    blk.coefficients.assign(k, SymMatrix());

    for (std::size_t t = 0; t < nz; ++t) {
      Matrix co(sz, sz);
      place_block(co, -rho * zbasis[t], 0, 0);
      place_block(co, -1.0 * zbasis[t], 0, n);
      place_block(co, -1.0 * zbasis[t], n, 0);
      if (with_delta) {
        place_block(co, -delta * zbasis[t], 0, 2 * n);
        place_block(co, -delta * zbasis[t], 2 * n, 0);
      }
      blk.coefficients[zvars[t]] = SymMatrix(co);
    }
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t bcol = 0; bcol < n; ++bcol) {
        const Matrix t = detail::column_into(b, a, bcol, n);
        Matrix co(sz, sz);
        place_block(co, -1.0 * (t + t.transpose()), 0, 0);
        blk.coefficients[y0 + a * n + bcol] = SymMatrix(co);
      }
    {
      Matrix co(sz, sz);
      for (std::size_t j = 0; j < n; ++j) co(j, j) = -1.0;
      if (with_delta)
        for (std::size_t j = 0; j < n; ++j) co(2 * n + j, 2 * n + j) = 1.0;
      blk.coefficients[mu_var] = SymMatrix(co);
    }
    prog.blocks.push_back(std::move(blk));
  }

  prog.blocks.push_back(detail::reaching_block(k, n, sigma0, theta_var, zvars, zbasis));

  if (alpha_u)
    prog.blocks.push_back(
        detail::control_budget_block(k, n, m, *alpha_u, y0, zvars, zbasis));

  prog.blocks.push_back(detail::scalar_floor(k, mu_var, kVarFloor));
  prog.blocks.push_back(detail::scalar_floor(k, theta_var, kVarFloor));

  prog.validate();
  return prog;
}

UvcInnerSolution solve_uvc_inner(const PolytopicPlant& plant, const Vec& sigma0,
                                 double rho, std::optional<double> alpha_u,
                                 const SdpOptions& opts) {
  const LinearMatrixProgram prog = build_uvc_inner(plant, sigma0, rho, alpha_u);
  UvcInnerSolution out;
  out.solution = solve(prog, opts);
  if (out.solution.status != SolveStatus::optimal) return out;

  const std::size_t n = plant.n, m = plant.m;
  const std::size_t nz = n * (n + 1) / 2;
  out.feasible = true;
  out.theta = out.solution.objective_value;
  out.z = unpack_sym(out.solution.x, 0, n);
  out.y = Matrix(m, n);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < n; ++b) out.y(a, b) = out.solution.x[nz + a * n + b];
  out.mu = out.solution.x[nz + m * n];
  return out;
}

UvcSynthesisResult synthesize_uvc(const PolytopicPlant& plant, const Vec& sigma0,
                                  double rho_lo, double rho_hi,
                                  std::optional<double> alpha_u,
                                  const UvcSynthOptions& opts) {
  UvcSynthesisResult out;
  std::map<double, UvcInnerSolution> cache;
  auto inner = [&](double rho) -> double {
    auto [it, inserted] = cache.try_emplace(rho);
    if (inserted) it->second = solve_uvc_inner(plant, sigma0, rho, alpha_u, opts.sdp);
    return it->second.feasible ? it->second.theta : kInf;
  };

  const LineSearchOutcome ls =
      minimize_over_rho(rho_lo, rho_hi, opts.grid_points, opts.rho_rel_tol, inner);
  if (!ls.any_feasible) {
    bool any_numfail = false;
    for (const auto& [rho, sol] : cache) {
      (void)rho;
      any_numfail |= sol.solution.status == SolveStatus::numerical_failure;
      out.solution = sol.solution;
    }
    out.solution.status =
        any_numfail ? SolveStatus::numerical_failure : SolveStatus::infeasible;
    out.note = any_numfail ? "no rho solved cleanly"
                           : "inner problem infeasible at every evaluated rho";
    return out;
  }

  const UvcInnerSolution& best = cache.at(ls.rho);
  out.solution = best.solution;

  UvcCertificate cert;
  cert.z = best.z;
  cert.y = best.y;
  cert.mu = best.mu;
  cert.rho = ls.rho;
  cert.theta = best.theta;
  cert.t_bound = std::sqrt(best.theta);
  cert.alpha_u = alpha_u;
  cert.delta = plant.delta;

  const InverseResult zi = inverse(best.z.mat());
  cert.conditioning_warning = zi.ill_conditioned;
  cert.gain = best.y * zi.inverse;

  cert.margin = feasibility_margin(build_uvc_inner(plant, sigma0, cert.rho, alpha_u),
                                   best.solution.x);

  std::uint64_t state = opts.audit_seed ? opts.audit_seed : 1;
  double worst = -kInf;
  for (int s = 0; s < opts.audit_samples; ++s) {
    const SimplexWeight w = random_simplex_weight(plant.vertex_count(), state);
    worst = std::max(worst, uvc_hull_inequality(plant, cert, w));
  }
  cert.hull_audit_worst = worst;
  if (worst >= 0.0) {
    out.note = "hull audit failed: unscaled inequality not negative definite";
    return out;
  }

  out.certificate = std::move(cert);
  return out;
}

UvcAnalysisOutcome analyze_uvc(const PolytopicPlant& plant, const Matrix& gain,
                               const Vec& sigma0, double rho_lo, double rho_hi,
                               const UvcSynthOptions& opts) {
  const std::size_t n = plant.n, m = plant.m;
  if (gain.rows() != m || gain.cols() != n)
    throw InvalidInputError("analyze_uvc: gain must be m x n");
  if (!gain.all_finite()) throw InvalidInputError("analyze_uvc: gain must be finite");
  if (sigma0.size() != n) throw InvalidInputError("analyze_uvc: sigma0 length mismatch");

  const double delta = plant.delta;
  const std::size_t nz = n * (n + 1) / 2;
  const std::size_t k = nz + 1;
  const std::size_t nu_var = nz;
  const std::vector<Matrix> pbasis = sym_basis(n);

  // Inner analysis program for fixed rho: minimize sigma0^T P sigma0 over the
  // lifted LMIs in (P, nu), with the auxiliary matrix variable already at its
  // binding value rho P + rho^{-1} I.
  auto build = [&](double rho) {
    LinearMatrixProgram prog;
    prog.var_count = k;
    prog.objective.assign(k, 0.0);
    {
      std::size_t t = 0;
      for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = p; q < n; ++q) {
          prog.objective[t] = (p == q) ? sigma0[p] * sigma0[p]
                                       : 2.0 * sigma0[p] * sigma0[q];
          ++t;
        }
    }
    for (const Matrix& b : plant.vertices) {
      const Matrix a = b * gain;
      const std::size_t sz = 2 * n;
      Matrix c(sz, sz);
      for (std::size_t j = 0; j < n; ++j) c(j, j) = -1.0 / rho;
      for (std::size_t i = 0; i < sz; ++i) c(i, i) -= kStrictEps;

      ConstraintBlock blk;
      blk.constant = SymMatrix(c);
      blk.coefficients.assign(k, SymMatrix());
      for (std::size_t t = 0; t < nz; ++t) {
        const Matrix& s = pbasis[t];
        Matrix co(sz, sz);
        place_block(co, -1.0 * (a.transpose() * s + s * a), 0, 0);
        place_block(co, -rho * s, 0, 0);
        place_block(co, -1.0 * s, 0, n);
        place_block(co, -1.0 * s, n, 0);
        blk.coefficients[t] = SymMatrix(co);
      }
      {
        Matrix co(sz, sz);
        for (std::size_t j = 0; j < n; ++j) {
          co(j, j) = -delta * delta;
          co(n + j, n + j) = 1.0;
        }
        blk.coefficients[nu_var] = SymMatrix(co);
      }
      prog.blocks.push_back(std::move(blk));
    }
    // P must stay positive definite to be a Lyapunov weight.
    {
      ConstraintBlock blk;
      Matrix c = Matrix::identity(n);
      c *= -kVarFloor;
      blk.constant = SymMatrix(c);
      blk.coefficients.assign(k, SymMatrix());
      for (std::size_t t = 0; t < nz; ++t) blk.coefficients[t] = SymMatrix(pbasis[t]);
      prog.blocks.push_back(std::move(blk));
    }
    prog.blocks.push_back(detail::scalar_floor(k, nu_var, kVarFloor));
    prog.blocks.push_back(detail::scalar_ceiling(k, nu_var, 1e6));
    prog.validate();
    return prog;
  };

  std::map<double, SdpSolution> cache;
  auto inner = [&](double rho) -> double {
    auto [it, inserted] = cache.try_emplace(rho);
    if (inserted) it->second = solve(build(rho), opts.sdp);
    return it->second.status == SolveStatus::optimal ? it->second.objective_value
                                                     : kInf;
  };

  UvcAnalysisOutcome out;
  const LineSearchOutcome ls =
      minimize_over_rho(rho_lo, rho_hi, opts.grid_points, opts.rho_rel_tol, inner);
  if (!ls.any_feasible) {
    bool any_numfail = false;
    for (const auto& [rho, sol] : cache) {
      (void)rho;
      any_numfail |= sol.status == SolveStatus::numerical_failure;
      out.solution = sol;
    }
    out.solution.status =
        any_numfail ? SolveStatus::numerical_failure : SolveStatus::infeasible;
    out.note = any_numfail ? "no rho solved cleanly"
                           : "gain not certified: analysis LMIs infeasible for every rho";
    return out;
  }
  out.solution = cache.at(ls.rho);

  UvcAnalysisResult res;
  res.p = unpack_sym(out.solution.x, 0, n);
  res.nu = out.solution.x[nu_var];
  res.rho = ls.rho;
  res.t_bound = std::sqrt(std::max(out.solution.objective_value, 0.0));
  out.result = std::move(res);
  return out;
}

RhoSweep rho_sweep(const PolytopicPlant& plant, const Vec& sigma0, const Vec& rho_grid,
                   std::optional<double> alpha_u, const SdpOptions& opts) {
  if (rho_grid.empty()) throw InvalidInputError("rho_sweep: empty grid");
  for (std::size_t i = 0; i < rho_grid.size(); ++i) {
    if (!(rho_grid[i] > 0.0)) throw InvalidInputError("rho_sweep: grid must be positive");
    if (i > 0 && !(rho_grid[i] > rho_grid[i - 1]))
      throw InvalidInputError("rho_sweep: grid must be strictly increasing");
  }
  RhoSweep sweep;
  sweep.points.reserve(rho_grid.size());
  for (double rho : rho_grid) {
    const UvcInnerSolution sol = solve_uvc_inner(plant, sigma0, rho, alpha_u, opts);
    RhoSweepPoint p;
    p.rho = rho;
    p.feasible = sol.feasible;
    p.theta = sol.feasible ? sol.theta : std::numeric_limits<double>::quiet_NaN();
    sweep.points.push_back(p);
  }
  return sweep;
}

double uvc_hull_inequality(const PolytopicPlant& plant, const UvcCertificate& cert,
                           const SimplexWeight& w) {
  const Matrix b = combine(plant, w);
  const std::size_t n = plant.n;
  const Matrix p = inverse(cert.z.mat()).inverse;
  const Matrix bk = b * cert.gain;
  Matrix m = bk.transpose() * p + p * bk;
  m += cert.mu * (p * p);
  m += cert.rho * p;
  const double shift = cert.delta * cert.delta / cert.mu + 1.0 / cert.rho;
  for (std::size_t j = 0; j < n; ++j) m(j, j) += shift;
  return max_eig(SymMatrix(m));
}

Vec uvc_certificate_variables(const UvcCertificate& cert) {
  const std::size_t n = cert.z.order();
  const std::size_t m = cert.y.rows();
  const std::size_t nz = n * (n + 1) / 2;
  Vec x(nz + m * n + 2, 0.0);
  std::size_t t = 0;
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = p; q < n; ++q) x[t++] = cert.z(p, q);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < n; ++b) x[nz + a * n + b] = cert.y(a, b);
  x[nz + m * n] = cert.mu;
  x[nz + m * n + 1] = cert.theta;
  return x;
}

double uvc_certificate_margin(const PolytopicPlant& plant, const Vec& sigma0,
                              const UvcCertificate& cert) {
  const LinearMatrixProgram prog =
      build_uvc_inner(plant, sigma0, cert.rho, cert.alpha_u);
  return feasibility_margin(prog, uvc_certificate_variables(cert));
}

}  // namespace reachtime
