#include "reachtime/vsc.hpp"

#include <cmath>
#include <limits>

#include "lmi_util.hpp"

namespace reachtime {

using detail::kStrictEps;
using detail::kVarFloor;

LinearMatrixProgram build_vsc_synthesis(const PolytopicPlant& plant, const Vec& sigma0,
                                        std::optional<double> alpha_u) {
  const std::size_t n = plant.n, m = plant.m;
  if (sigma0.size() != n)
    throw InvalidInputError("vsc: sigma0 length must equal the state dimension");
  for (double v : sigma0)
    if (!std::isfinite(v)) throw InvalidInputError("vsc: sigma0 must be finite");
  if (alpha_u && !(*alpha_u > 0.0))
    throw InvalidInputError("vsc: alpha_u must be positive");

  const bool with_delta = plant.delta > 0.0;
  const double delta = plant.delta;
  const std::size_t k = n + m * n + 2;
  const std::size_t y0 = n;
  const std::size_t beta_var = n + m * n;
  const std::size_t theta_var = beta_var + 1;

  LinearMatrixProgram prog;
  prog.var_count = k;
  prog.objective.assign(k, 0.0);
  prog.objective[theta_var] = 1.0;

  // Basis of diag(Zd): z_j sits on entry (j, j).
  std::vector<std::size_t> zvars(n);
  std::vector<Matrix> zbasis;
  for (std::size_t j = 0; j < n; ++j) {
    zvars[j] = j;
    zbasis.push_back(detail::elementary(n, j, j));
  }

  // Vertex blocks: sign-flipped Schur form of the closed-loop inequality.
  // With delta = 0 the disturbance row/column drops and beta only pads the
  // leading block (the optimizer drives it to its floor).
  const std::size_t sz = with_delta ? 3 * n : 2 * n;
  for (const Matrix& b : plant.vertices) {
    Matrix c(sz, sz);
    for (std::size_t j = 0; j < n; ++j) c(n + j, n + j) = 1.0;
    for (std::size_t i = 0; i < sz; ++i) c(i, i) -= kStrictEps;

    ConstraintBlock blk;
    blk.constant = SymMatrix(c);
    blk.coefficients.assign(k, SymMatrix());

    for (std::size_t j = 0; j < n; ++j) {
      Matrix co(sz, sz);
      place_block(co, -1.0 * zbasis[j], 0, n);
      place_block(co, -1.0 * zbasis[j], n, 0);
      if (with_delta) {
        place_block(co, -delta * zbasis[j], 0, 2 * n);
        place_block(co, -delta * zbasis[j], 2 * n, 0);
      }
      blk.coefficients[zvars[j]] = SymMatrix(co);
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
      blk.coefficients[beta_var] = SymMatrix(co);
    }
    prog.blocks.push_back(std::move(blk));
  }

  // Reaching-time block with lead vector zeta_j = sqrt(|sigma0_j|).
  Vec zeta(n);
  for (std::size_t j = 0; j < n; ++j) zeta[j] = std::sqrt(std::abs(sigma0[j]));
  prog.blocks.push_back(detail::reaching_block(k, n, zeta, theta_var, zvars, zbasis));

  if (alpha_u)
    prog.blocks.push_back(
        detail::control_budget_block(k, n, m, *alpha_u, y0, zvars, zbasis));

  for (std::size_t j = 0; j < n; ++j)
    prog.blocks.push_back(detail::scalar_floor(k, zvars[j], kVarFloor));
  prog.blocks.push_back(detail::scalar_floor(k, beta_var, kVarFloor));
  prog.blocks.push_back(detail::scalar_floor(k, theta_var, kVarFloor));

  prog.validate();
  return prog;
}

VscSynthesisResult synthesize_vsc(const PolytopicPlant& plant, const Vec& sigma0,
                                  std::optional<double> alpha_u,
                                  const VscSynthOptions& opts) {
  const LinearMatrixProgram prog = build_vsc_synthesis(plant, sigma0, alpha_u);
  VscSynthesisResult out;
  out.solution = solve(prog, opts.sdp);
  if (out.solution.status == SolveStatus::infeasible) {
    out.note = "synthesis LMIs are infeasible (control budget too small?)";
    return out;
  }
  if (out.solution.status == SolveStatus::numerical_failure) {
    out.note = "solver did not reach the requested tolerance";
    return out;
  }

  const std::size_t n = plant.n, m = plant.m;
  const Vec& x = out.solution.x;
  VscCertificate cert;
  Vec zdiag(x.begin(), x.begin() + static_cast<long>(n));
  cert.zd = Matrix::diag(zdiag);
  cert.y = Matrix(m, n);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < n; ++b) cert.y(a, b) = x[n + a * n + b];
  cert.beta = x[n + m * n];
  cert.theta = x[n + m * n + 1];
  cert.t_bound = 2.0 * cert.theta;
  cert.alpha_u = alpha_u;
  cert.delta = plant.delta;

  const InverseResult zi = inverse(cert.zd);
  cert.conditioning_warning = zi.ill_conditioned;
  cert.gain = cert.y * zi.inverse;

  cert.margin = feasibility_margin(prog, x);

  // Robustness audit: vertices are sufficient in theory; sampling the hull
  // guards the implementation.
  std::uint64_t state = opts.audit_seed ? opts.audit_seed : 1;
  double worst = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < opts.audit_samples; ++s) {
    const SimplexWeight w = random_simplex_weight(plant.vertex_count(), state);
    worst = std::max(worst, vsc_hull_inequality(plant, cert, w));
  }
  cert.hull_audit_worst = worst;
  if (worst >= 0.0) {
    out.note = "hull audit failed: unscaled inequality not negative definite";
    return out;
  }

  out.certificate = std::move(cert);
  return out;
}

VscAnalysisOutcome analyze_vsc(const PolytopicPlant& plant, const Matrix& gain,
                               const Vec& sigma0, const SdpOptions& opts) {
  const std::size_t n = plant.n, m = plant.m;
  if (gain.rows() != m || gain.cols() != n)
    throw InvalidInputError("analyze_vsc: gain must be m x n");
  if (!gain.all_finite()) throw InvalidInputError("analyze_vsc: gain must be finite");
  if (sigma0.size() != n) throw InvalidInputError("analyze_vsc: sigma0 length mismatch");

  const double delta = plant.delta;
  const std::size_t k = n + 1;
  const std::size_t nu_var = n;

  LinearMatrixProgram prog;
  prog.var_count = k;
  prog.objective.assign(k, 0.0);
  for (std::size_t j = 0; j < n; ++j) prog.objective[j] = 2.0 * std::abs(sigma0[j]);

  // Lifted vertex blocks in (Pd, nu): the quadratic weight term enters through
  // a Schur complement against nu = 1/beta.
  for (const Matrix& b : plant.vertices) {
    const Matrix a = b * gain;  // n x n closed-loop map
    const std::size_t sz = 2 * n;
    Matrix c(sz, sz);
    for (std::size_t j = 0; j < n; ++j) c(j, j) = -1.0;
    for (std::size_t i = 0; i < sz; ++i) c(i, i) -= kStrictEps;

    ConstraintBlock blk;
    blk.constant = SymMatrix(c);
    blk.coefficients.assign(k, SymMatrix());
    for (std::size_t j = 0; j < n; ++j) {
      const Matrix s = detail::elementary(n, j, j);
      Matrix co(sz, sz);
      place_block(co, -1.0 * (a.transpose() * s + s * a), 0, 0);
      place_block(co, -1.0 * s, 0, n);
      place_block(co, -1.0 * s, n, 0);
      blk.coefficients[j] = SymMatrix(co);
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

  for (std::size_t j = 0; j < n; ++j)
    prog.blocks.push_back(detail::scalar_floor(k, j, kVarFloor));
  prog.blocks.push_back(detail::scalar_floor(k, nu_var, kVarFloor));
  // nu carries no objective weight when delta = 0; the cap keeps the barrier
  // subproblem bounded without touching the reported bound.
  prog.blocks.push_back(detail::scalar_ceiling(k, nu_var, 1e6));
  prog.validate();

  VscAnalysisOutcome out;
  out.solution = solve(prog, opts);
  if (out.solution.status == SolveStatus::infeasible) {
    out.note = "gain not certified: analysis LMIs infeasible";
    return out;
  }
  if (out.solution.status == SolveStatus::numerical_failure) {
    out.note = "solver did not reach the requested tolerance";
    return out;
  }
  VscAnalysisResult res;
  Vec pdiag(out.solution.x.begin(), out.solution.x.begin() + static_cast<long>(n));
  res.pd = Matrix::diag(pdiag);
  res.nu = out.solution.x[nu_var];
  res.t_bound = out.solution.objective_value;
  out.result = std::move(res);
  return out;
}

double vsc_lyapunov_value(const Matrix& pd, const Vec& sigma) {
  if (pd.rows() != pd.cols() || pd.rows() != sigma.size())
    throw InvalidInputError("vsc_lyapunov_value: dimension mismatch");
  double v = 0.0;
  for (std::size_t j = 0; j < sigma.size(); ++j) v += pd(j, j) * std::abs(sigma[j]);
  return v;
}

double vsc_hull_inequality(const PolytopicPlant& plant, const VscCertificate& cert,
                           const SimplexWeight& w) {
  const Matrix b = combine(plant, w);
  const std::size_t n = plant.n;
  Vec pdiag(n);
  for (std::size_t j = 0; j < n; ++j) pdiag[j] = 1.0 / cert.zd(j, j);
  const Matrix pd = Matrix::diag(pdiag);
  const Matrix bk = b * cert.gain;
  Matrix m = bk.transpose() * pd + pd * bk;
  const double shift = 1.0 + cert.delta * cert.delta / cert.beta;
  for (std::size_t j = 0; j < n; ++j) {
    m(j, j) += shift;
    m(j, j) += cert.beta * pdiag[j] * pdiag[j];
  }
  return max_eig(SymMatrix(m));
}

Vec vsc_certificate_variables(const VscCertificate& cert) {
  const std::size_t n = cert.zd.rows();
  const std::size_t m = cert.y.rows();
  Vec x(n + m * n + 2, 0.0);
  for (std::size_t j = 0; j < n; ++j) x[j] = cert.zd(j, j);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < n; ++b) x[n + a * n + b] = cert.y(a, b);
  x[n + m * n] = cert.beta;
  x[n + m * n + 1] = cert.theta;
  return x;
}

double vsc_certificate_margin(const PolytopicPlant& plant, const Vec& sigma0,
                              const VscCertificate& cert) {
  const LinearMatrixProgram prog = build_vsc_synthesis(plant, sigma0, cert.alpha_u);
  return feasibility_margin(prog, vsc_certificate_variables(cert));
}

}  // namespace reachtime
