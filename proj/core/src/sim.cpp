#include "reachtime/sim.hpp"

#include <cmath>
#include <limits>

namespace reachtime {

namespace {

Matrix resolve_member(const PolytopicPlant& plant, const PlantSelect& sel) {
  if (std::holds_alternative<std::size_t>(sel)) {
    const std::size_t idx = std::get<std::size_t>(sel);
    if (idx >= plant.vertex_count())
      throw InvalidInputError("simulate: vertex index out of range");
    return plant.vertices[idx];
  }
  return combine(plant, std::get<SimplexWeight>(sel));
}

}  // namespace

Trajectory simulate(const PolytopicPlant& plant, const Controller& controller,
                    const DisturbanceSpec& f, const Vec& sigma0, const SimConfig& cfg) {
  const std::size_t n = plant.n, m = plant.m;
  if (controller.gain.rows() != m || controller.gain.cols() != n)
    throw InvalidInputError("simulate: gain must be m x n");
  if (sigma0.size() != n) throw InvalidInputError("simulate: sigma0 length mismatch");
  if (f.dim() != n) throw InvalidInputError("simulate: disturbance dimension mismatch");
  if (f.bound > plant.delta + 1e-9)
    throw InvalidInputError("simulate: disturbance bound exceeds the plant's delta");
  if (!(cfg.dt > 0.0) || !(cfg.horizon >= cfg.dt))
    throw InvalidInputError("simulate: need dt > 0 and horizon >= dt");

  const Matrix b = resolve_member(plant, cfg.weight);
  const Matrix bk = b * controller.gain;  // n x n closed-loop map on phi(sigma)

  const double sigma0_norm = norm2(sigma0);
  const double abort_norm = 1e6 * (sigma0_norm > 0.0 ? sigma0_norm : 1.0);

  const auto steps = static_cast<std::size_t>(std::floor(cfg.horizon / cfg.dt + 0.5));
  Trajectory traj;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.controls.reserve(steps + 1);
  traj.control_norms.reserve(steps + 1);

  Vec sigma = sigma0;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    const Vec dir = phi(controller.kind, sigma);
    const Vec u = controller.gain.apply(dir);

    traj.times.push_back(t);
    traj.states.push_back(sigma);
    traj.controls.push_back(u);
    traj.control_norms.push_back(norm2(u));

    if (k == steps) break;
    const Vec drift = bk.apply(dir);
    const Vec dist = f.value(t);
    for (std::size_t j = 0; j < n; ++j) sigma[j] += cfg.dt * (drift[j] + dist[j]);
    if (norm2(sigma) > abort_norm)
      throw DivergenceError("simulate: state norm escaped the divergence guard", t);
  }
  return traj;
}

std::optional<double> detect_reaching_time(const Trajectory& traj, double reach_fraction,
                                           int hold_steps) {
  if (traj.times.empty()) throw InvalidInputError("detect_reaching_time: empty trajectory");
  if (!(reach_fraction > 0.0 && reach_fraction < 1.0) || hold_steps < 1)
    throw InvalidInputError("detect_reaching_time: bad parameters");

  const double threshold = reach_fraction * norm2(traj.states.front());
  // First index where the threshold holds for hold_steps + 1 consecutive samples.
  int run = 0;
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    if (norm2(traj.states[k]) <= threshold) {
      ++run;
      if (run >= hold_steps + 1)
        return traj.times[k - static_cast<std::size_t>(hold_steps)];
    } else {
      run = 0;
    }
  }
  return std::nullopt;
}

namespace {

AuditReport run_audit(const Trajectory& traj, const Vec& lyap, double t_bound,
                      double ceiling) {
  if (traj.times.size() < 2) throw InvalidInputError("audit: trajectory too short");
  const double dt = traj.times[1] - traj.times[0];

  AuditReport rep;
  rep.t_bound = t_bound;
  rep.control_ceiling = ceiling;

  rep.reach_time = detect_reaching_time(traj, 1e-3, 100);
  rep.reach_ok = rep.reach_time && *rep.reach_time <= t_bound + 2.0 * dt;

  const std::size_t reach_idx =
      rep.reach_time
          ? static_cast<std::size_t>(std::floor(*rep.reach_time / dt + 0.5))
          : traj.states.size() - 1;

  // Lyapunov decrease allowance: one explicit-Euler step may overshoot by the
  // product of the state rate and the gradient scale.
  double max_rate = 0.0;
  for (std::size_t k = 0; k + 1 < traj.states.size(); ++k) {
    Vec d = traj.states[k + 1];
    for (std::size_t j = 0; j < d.size(); ++j) d[j] -= traj.states[k][j];
    max_rate = std::max(max_rate, norm2(d) / dt);
  }
  double grad_scale = 0.0;
  if (!lyap.empty() && traj.states.size() >= 2) {
    // scale from the data itself: |dv| <= ||grad|| ||dsigma||
    for (std::size_t k = 0; k + 1 < traj.states.size(); ++k) {
      Vec d = traj.states[k + 1];
      for (std::size_t j = 0; j < d.size(); ++j) d[j] -= traj.states[k][j];
      const double dn = norm2(d);
      if (dn > 1e-14)
        grad_scale = std::max(grad_scale, std::abs(lyap[k + 1] - lyap[k]) / dn);
    }
  }
  rep.lyapunov_allowance = 10.0 * dt * max_rate * std::max(grad_scale, 1e-12);
  double worst_increase = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 <= reach_idx && k + 1 < lyap.size(); ++k)
    worst_increase = std::max(worst_increase, lyap[k + 1] - lyap[k]);
  rep.lyapunov_max_increase = worst_increase;
  rep.lyapunov_ok = worst_increase <= rep.lyapunov_allowance;

  rep.control_peak = 0.0;
  for (double cn : traj.control_norms) rep.control_peak = std::max(rep.control_peak, cn);
  rep.control_ok = rep.control_peak <= ceiling + 1e-9;

  rep.pass = rep.reach_ok && rep.lyapunov_ok && rep.control_ok;
  return rep;
}

}  // namespace

Vec trajectory_lyapunov(const Trajectory& traj, const VscCertificate& cert) {
  const std::size_t n = cert.zd.rows();
  Vec pdiag(n);
  for (std::size_t j = 0; j < n; ++j) pdiag[j] = 1.0 / cert.zd(j, j);
  const Matrix pd = Matrix::diag(pdiag);
  Vec v;
  v.reserve(traj.states.size());
  for (const auto& s : traj.states) v.push_back(vsc_lyapunov_value(pd, s));
  return v;
}

Vec trajectory_lyapunov(const Trajectory& traj, const UvcCertificate& cert) {
  const Matrix p = inverse(cert.z.mat()).inverse;
  Vec v;
  v.reserve(traj.states.size());
  for (const auto& s : traj.states) {
    const Vec ps = p.apply(s);
    v.push_back(dot(s, ps));
  }
  return v;
}

double vsc_control_ceiling(const VscCertificate& cert) {
  if (!cert.alpha_u) return std::numeric_limits<double>::infinity();
  double trace_pd = 0.0;
  for (std::size_t j = 0; j < cert.zd.rows(); ++j) trace_pd += 1.0 / cert.zd(j, j);
  return *cert.alpha_u * std::sqrt(trace_pd);
}

double uvc_control_ceiling(const UvcCertificate& cert) {
  if (!cert.alpha_u) return std::numeric_limits<double>::infinity();
  const Matrix p = inverse(cert.z.mat()).inverse;
  return *cert.alpha_u * std::sqrt(max_eig(SymMatrix(p)));
}

AuditReport audit_certificate(const Trajectory& traj, const VscCertificate& cert) {
  return run_audit(traj, trajectory_lyapunov(traj, cert), cert.t_bound,
                   vsc_control_ceiling(cert));
}

AuditReport audit_certificate(const Trajectory& traj, const UvcCertificate& cert) {
  return run_audit(traj, trajectory_lyapunov(traj, cert), cert.t_bound,
                   uvc_control_ceiling(cert));
}

}  // namespace reachtime
