#include "reachtime/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>

namespace reachtime {

void LinearMatrixProgram::validate() const {
  if (objective.size() != var_count)
    throw InvalidInputError("program: objective length must equal var_count");
  for (double v : objective)
    if (!std::isfinite(v)) throw InvalidInputError("program: objective must be finite");
  if (blocks.empty()) throw InvalidInputError("program: at least one block required");
  for (const auto& b : blocks) {
    const std::size_t order = b.constant.order();
    if (order == 0) throw InvalidInputError("program: empty block");
    if (b.coefficients.size() != var_count)
      throw InvalidInputError("program: coefficient list length must equal var_count");
    for (const auto& a : b.coefficients)
      if (a.order() != 0 && a.order() != order)  // order 0 stands for a zero matrix
        throw InvalidInputError("program: coefficient order mismatch within block");
  }
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::numerical_failure: return "numerical-failure";
  }
  return "unknown";
}

SymMatrix evaluate_block(const ConstraintBlock& b, const Vec& x) {
  if (x.size() != b.coefficients.size())
    throw InvalidInputError("evaluate_block: dimension mismatch");
  Matrix acc = b.constant.mat();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) continue;
    const Matrix& a = b.coefficients[i].mat();
    if (a.max_abs() == 0.0) continue;
    acc += x[i] * a;
  }
  return SymMatrix(acc);
}

double feasibility_margin(const LinearMatrixProgram& prob, const Vec& x) {
  if (x.size() != prob.var_count)
    throw InvalidInputError("feasibility_margin: dimension mismatch");
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& b : prob.blocks)
    worst = std::min(worst, min_eig(evaluate_block(b, x)));
  return worst;
}

namespace {

struct CompiledBlock {
  Matrix constant;
  std::vector<std::pair<std::size_t, Matrix>> terms;  // nonzero coefficients only
  std::size_t order = 0;
};

std::vector<CompiledBlock> compile(const LinearMatrixProgram& prob) {
  std::vector<CompiledBlock> out;
  out.reserve(prob.blocks.size());
  for (const auto& b : prob.blocks) {
    CompiledBlock cb;
    cb.constant = b.constant.mat();
    cb.order = b.constant.order();
    for (std::size_t i = 0; i < b.coefficients.size(); ++i)
      if (b.coefficients[i].order() > 0 && b.coefficients[i].max_abs() != 0.0)
        cb.terms.emplace_back(i, b.coefficients[i].mat());
    out.push_back(std::move(cb));
  }
  return out;
}

void eval_into(const CompiledBlock& b, const Vec& x, Matrix& f) {
  f = b.constant;
  for (const auto& [idx, a] : b.terms) {
    const double xi = x[idx];
    if (xi == 0.0) continue;
    for (std::size_t p = 0; p < f.data().size(); ++p) f.data()[p] += xi * a.data()[p];
  }
}

// In-place lower Cholesky; false if any pivot is non-positive.
bool chol_dense(const Matrix& s, Matrix& L) {
  const std::size_t n = s.rows();
  if (L.rows() != n || L.cols() != n) L = Matrix(n, n);
  else std::fill(L.data().begin(), L.data().end(), 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double d = s(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    L(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = s(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= L(i, k) * L(j, k);
      L(i, j) = v / L(j, j);
    }
  }
  return true;
}

double logdet_from_factor(const Matrix& L) {
  double s = 0.0;
  for (std::size_t i = 0; i < L.rows(); ++i) s += std::log(L(i, i));
  return 2.0 * s;
}

// X = L^{-1} B.
Matrix forward_solve(const Matrix& L, const Matrix& B) {
  const std::size_t n = L.rows();
  Matrix X = B;
  for (std::size_t j = 0; j < X.cols(); ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      double v = X(i, j);
      for (std::size_t k = 0; k < i; ++k) v -= L(i, k) * X(k, j);
      X(i, j) = v / L(i, i);
    }
  }
  return X;
}

// W = L^{-1} A L^{-T} for symmetric A (result symmetrized).
Matrix scaled_coefficient(const Matrix& L, const Matrix& A) {
  Matrix X = forward_solve(L, A);
  Matrix W = forward_solve(L, X.transpose());
  const std::size_t n = W.rows();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 0.5 * (W(i, j) + W(j, i));
      W(i, j) = v;
      W(j, i) = v;
    }
  return W;
}

double frob_inner(const Matrix& a, const Matrix& b) {
  double s = 0.0;
  for (std::size_t p = 0; p < a.data().size(); ++p) s += a.data()[p] * b.data()[p];
  return s;
}

// Cholesky solve of (H + ridge I) d = rhs with an escalating ridge.
bool solve_spd(const Matrix& H, const Vec& rhs, Vec& out) {
  const std::size_t k = H.rows();
  double dmax = 0.0;
  for (std::size_t i = 0; i < k; ++i) dmax = std::max(dmax, std::abs(H(i, i)));
  if (dmax == 0.0) dmax = 1.0;
  for (double ridge = 0.0;;) {
    Matrix A = H;
    for (std::size_t i = 0; i < k; ++i) A(i, i) += ridge;
    Matrix L;
    if (chol_dense(A, L)) {
      Vec y(rhs);
      for (std::size_t i = 0; i < k; ++i) {
        double v = y[i];
        for (std::size_t t = 0; t < i; ++t) v -= L(i, t) * y[t];
        y[i] = v / L(i, i);
      }
      out.assign(k, 0.0);
      for (std::size_t ii = k; ii-- > 0;) {
        double v = y[ii];
        for (std::size_t t = ii + 1; t < k; ++t) v -= L(t, ii) * out[t];
        out[ii] = v / L(ii, ii);
      }
      return true;
    }
    ridge = (ridge == 0.0) ? 1e-14 * dmax : ridge * 100.0;
    if (ridge > 1e-2 * dmax) return false;
  }
}

struct PathState {
  Vec x;
  double t = 1.0;
  bool centered = false;
  bool early = false;
  int newton_steps = 0;
};

class Barrier {
 public:
  Barrier(std::vector<CompiledBlock> blocks, Vec c)
      : blocks_(std::move(blocks)), c_(std::move(c)) {
    for (const auto& b : blocks_) m_total_ += static_cast<double>(b.order);
  }

  double degree() const { return m_total_; }
  const Vec& objective() const { return c_; }

  bool factorize(const Vec& x, std::vector<Matrix>& Ls) const {
    Ls.resize(blocks_.size());
    Matrix f;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      eval_into(blocks_[b], x, f);
      if (!chol_dense(f, Ls[b])) return false;
    }
    return true;
  }

  double value(double t, const Vec& x, const std::vector<Matrix>& Ls) const {
    double phi = t * dot(c_, x);
    for (const auto& L : Ls) phi -= logdet_from_factor(L);
    return phi;
  }

  // Gradient of t*c.x - sum logdet at a factorized point.
  Vec gradient(double t, const std::vector<Matrix>& Ls) const {
    Vec g(c_.size());
    for (std::size_t i = 0; i < c_.size(); ++i) g[i] = t * c_[i];
    for (std::size_t b = 0; b < blocks_.size(); ++b)
      for (const auto& [idx, A] : blocks_[b].terms)
        g[idx] -= scaled_coefficient(Ls[b], A).trace();
    return g;
  }

  // One Newton centering run at fixed t. `stop` (optional) is polled after every
  // accepted step so phase I can bail out as soon as its margin target is met.
  bool center(double t, Vec& x, int& budget, PathState& st,
              const std::function<bool(const Vec&)>& stop) const {
    const double ntol = 1e-10;
    const std::size_t k = c_.size();
    std::vector<Matrix> Ls;
    std::vector<Matrix> Ws;
    for (int it = 0; it < 200; ++it) {
      if (budget <= 0) return false;
      if (!factorize(x, Ls)) return false;

      Vec g(k, 0.0);
      for (std::size_t i = 0; i < k; ++i) g[i] = t * c_[i];
      Matrix H(std::max<std::size_t>(k, 1), std::max<std::size_t>(k, 1));
      for (std::size_t b = 0; b < blocks_.size(); ++b) {
        const auto& terms = blocks_[b].terms;
        Ws.clear();
        Ws.reserve(terms.size());
        for (const auto& [idx, A] : terms) {
          Matrix W = scaled_coefficient(Ls[b], A);
          g[idx] -= W.trace();
          Ws.push_back(std::move(W));
        }
        for (std::size_t i = 0; i < terms.size(); ++i)
          for (std::size_t j = i; j < terms.size(); ++j) {
            const double v = frob_inner(Ws[i], Ws[j]);
            const std::size_t vi = terms[i].first, vj = terms[j].first;
            H(vi, vj) += v;
            if (vi != vj) H(vj, vi) += v;
          }
      }
      if (k == 0) return true;

      Vec rhs(k);
      for (std::size_t i = 0; i < k; ++i) rhs[i] = -g[i];
      Vec d;
      if (!solve_spd(H, rhs, d)) return false;
      double lambda2 = -dot(g, d);
      if (!(lambda2 > 0.0)) lambda2 = 0.0;
      if (lambda2 <= ntol) return true;

      const double phi0 = value(t, x, Ls);
      double alpha = 1.0;
      bool accepted = false;
      Vec xt(k);
      std::vector<Matrix> Lt;
      for (int ls = 0; ls < 60; ++ls) {
        for (std::size_t i = 0; i < k; ++i) xt[i] = x[i] + alpha * d[i];
        if (factorize(xt, Lt)) {
          const double phit = value(t, xt, Lt);
          if (phit <= phi0 - 0.25 * alpha * lambda2) {
            x = xt;
            accepted = true;
            break;
          }
        }
        alpha *= 0.5;
      }
      --budget;
      ++st.newton_steps;
      if (!accepted) return false;
      if (stop && stop(x)) {
        st.early = true;
        return true;
      }
    }
    return false;
  }

  // Path following: geometric increase of t with centering at each stage.
  PathState follow(Vec x0, double gap_rel_target, int& budget,
                   const std::function<bool(const Vec&)>& stop) const {
    PathState st;
    st.x = std::move(x0);
    const double obj0 = dot(c_, st.x);
    st.t = std::max(1.0, m_total_ / (1.0 + std::abs(obj0)));
    for (int stage = 0; stage < 64; ++stage) {
      st.centered = center(st.t, st.x, budget, st, stop);
      if (st.early) return st;
      const double obj = dot(c_, st.x);
      const double gap = m_total_ / st.t;
      if (st.centered && gap <= gap_rel_target * (1.0 + std::abs(obj))) return st;
      if (!st.centered || budget <= 0) return st;
      if (inf_norm(st.x) > 1e14) {
        st.centered = false;
        return st;
      }
      st.t *= 20.0;
    }
    st.centered = false;
    return st;
  }

 private:
  std::vector<CompiledBlock> blocks_;
  Vec c_;
  double m_total_ = 0.0;
};

struct PhaseOneOutcome {
  enum class Kind { feasible, infeasible, failure } kind;
  Vec x;           // strictly feasible point when feasible
  double margin;   // achieved (feasible) or best-possible bound (infeasible)
  int newton_steps = 0;
};

PhaseOneOutcome phase_one(const std::vector<CompiledBlock>& blocks, std::size_t k,
                          int& budget) {
  const double target = 1e-3;

  // Margin of the all-zeros start decides whether phase I is needed at all.
  double margin0 = std::numeric_limits<double>::infinity();
  for (const auto& b : blocks) margin0 = std::min(margin0, min_eig(SymMatrix(b.constant)));
  Vec zero(k, 0.0);
  if (margin0 >= 1e-8) return {PhaseOneOutcome::Kind::feasible, zero, margin0, 0};

  // Augmented program in (x, s): maximize s subject to F_b(x) - s I PSD, s <= cap.
  std::vector<CompiledBlock> aug = blocks;
  for (auto& b : aug) {
    Matrix negI = Matrix::identity(b.order);
    negI *= -1.0;
    b.terms.emplace_back(k, std::move(negI));
  }
  const double cap = std::max(1.0, 2.0 * std::abs(margin0));
  CompiledBlock capblk;
  capblk.order = 1;
  capblk.constant = Matrix(1, 1);
  capblk.constant(0, 0) = cap;
  Matrix negone(1, 1);
  negone(0, 0) = -1.0;
  capblk.terms.emplace_back(k, std::move(negone));
  aug.push_back(std::move(capblk));

  Vec c_aux(k + 1, 0.0);
  c_aux[k] = -1.0;
  Barrier aux(std::move(aug), std::move(c_aux));

  Vec x(k + 1, 0.0);
  x[k] = margin0 - 1.0;

  auto stop = [target](const Vec& v) { return v.back() >= target; };

  PathState st;
  st.x = x;
  st.t = std::max(1.0, aux.degree() / (1.0 + std::abs(x[k])));
  int steps = 0;
  for (int stage = 0; stage < 64; ++stage) {
    const bool centered = aux.center(st.t, st.x, budget, st, stop);
    steps = st.newton_steps;
    const double s = st.x.back();
    if (st.early || s >= target) {
      Vec xf(st.x.begin(), st.x.begin() + static_cast<long>(k));
      return {PhaseOneOutcome::Kind::feasible, std::move(xf), s, steps};
    }
    const double gap = aux.degree() / st.t;
    if (centered && s + gap < 1e-7)
      return {PhaseOneOutcome::Kind::infeasible, Vec(), s + gap, steps};
    if (!centered || budget <= 0) break;
    st.t *= 20.0;
  }
  const double s = st.x.back();
  if (s > 1e-9) {
    Vec xf(st.x.begin(), st.x.begin() + static_cast<long>(k));
    return {PhaseOneOutcome::Kind::feasible, std::move(xf), s, steps};
  }
  return {PhaseOneOutcome::Kind::failure, Vec(), s, steps};
}

}  // namespace

SdpSolution solve(const LinearMatrixProgram& prob, const SdpOptions& opts) {
  prob.validate();
  if (opts.tolerance <= 0.0 || opts.max_iterations <= 0)
    throw InvalidInputError("solve: tolerance and max_iterations must be positive");

  auto blocks = compile(prob);
  int budget = opts.max_iterations;

  SdpSolution out;
  out.x.assign(prob.var_count, 0.0);

  auto finish_margins = [&](const Vec& x) {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& b : prob.blocks)
      worst = std::min(worst, min_eig(evaluate_block(b, x)));
    return worst;
  };

  const auto p1 = phase_one(blocks, prob.var_count, budget);
  out.newton_iterations = opts.max_iterations - budget;
  if (p1.kind == PhaseOneOutcome::Kind::infeasible) {
    out.status = SolveStatus::infeasible;
    out.infeasibility_certificate = p1.margin;
    return out;
  }
  if (p1.kind == PhaseOneOutcome::Kind::failure) {
    out.status = SolveStatus::numerical_failure;
    out.infeasibility_certificate = p1.margin;
    return out;
  }

  out.x = p1.x;

  const bool zero_objective = inf_norm(prob.objective) == 0.0;
  if (zero_objective) {
    out.status = SolveStatus::optimal;
    out.objective_value = 0.0;
    out.kkt_residual = 0.0;
    out.min_block_margin = finish_margins(out.x);
    out.newton_iterations = opts.max_iterations - budget;
    return out;
  }

  Barrier main(std::move(blocks), prob.objective);
  PathState st = main.follow(out.x, opts.tolerance, budget, nullptr);
  out.x = st.x;
  out.objective_value = dot(prob.objective, out.x);
  out.newton_iterations = opts.max_iterations - budget;

  // KKT measure at the final iterate: relative duality gap of the central point
  // plus the dual residual ||g||/t left by imperfect centering.
  std::vector<Matrix> Ls;
  double kkt = std::numeric_limits<double>::infinity();
  if (main.factorize(out.x, Ls)) {
    const Vec g = main.gradient(st.t, Ls);
    const double dual_res =
        inf_norm(g) / (st.t * (1.0 + inf_norm(prob.objective)));
    const double gap_rel =
        main.degree() / (st.t * (1.0 + std::abs(out.objective_value)));
    kkt = std::max(dual_res, gap_rel);
  }
  out.kkt_residual = kkt;
  out.min_block_margin = finish_margins(out.x);
  out.status = (kkt <= opts.tolerance && out.min_block_margin > -1e-8)
                   ? SolveStatus::optimal
                   : SolveStatus::numerical_failure;
  return out;
}

}  // namespace reachtime
