#pragma once

#include <optional>
#include <variant>

#include "reachtime/model.hpp"
#include "reachtime/uvc.hpp"
#include "reachtime/vsc.hpp"

namespace reachtime {

/// Selects which hull member drives a simulation run.
using PlantSelect = std::variant<SimplexWeight, std::size_t>;

struct SimConfig {
  double dt = 1e-4;
  double horizon = 1.0;
  double reach_fraction = 1e-3;  // reach threshold relative to ||sigma0||
  int hold_steps = 100;          // samples the threshold must hold
  PlantSelect weight = std::size_t{0};
};

struct Trajectory {
  Vec times;
  std::vector<Vec> states;
  std::vector<Vec> controls;
  Vec control_norms;
  Vec lyapunov;  // optional; filled by trajectory_lyapunov / the CLI
};

/// Explicit fixed-step Euler integration of sigma' = B K phi(sigma) + f(t),
/// with the disturbance evaluated at the left endpoint. Throws DivergenceError
/// when the state norm exceeds 1e6 * ||sigma0||.
Trajectory simulate(const PolytopicPlant& plant, const Controller& controller,
                    const DisturbanceSpec& f, const Vec& sigma0, const SimConfig& cfg);

/// Earliest t such that ||sigma(s)|| <= reach_fraction * ||sigma(0)|| for all
/// s in [t, t + hold_steps * dt]; nullopt when no such window exists.
std::optional<double> detect_reaching_time(const Trajectory& traj, double reach_fraction,
                                           int hold_steps);

struct AuditReport {
  std::optional<double> reach_time;
  double t_bound = 0.0;
  bool reach_ok = false;  // reached within t_bound + 2 dt

  double lyapunov_max_increase = 0.0;  // max forward difference before reaching
  double lyapunov_allowance = 0.0;
  bool lyapunov_ok = false;

  double control_peak = 0.0;
  double control_ceiling = 0.0;  // alpha_u-derived bound; +inf without a budget
  bool control_ok = false;

  bool pass = false;
};

/// Checks a trajectory against a certificate: Lyapunov decrease up to the
/// integration allowance, the control-norm ceiling, and the reaching bound.
AuditReport audit_certificate(const Trajectory& traj, const VscCertificate& cert);
AuditReport audit_certificate(const Trajectory& traj, const UvcCertificate& cert);

/// Lyapunov samples along a trajectory for the certificate's function.
Vec trajectory_lyapunov(const Trajectory& traj, const VscCertificate& cert);
Vec trajectory_lyapunov(const Trajectory& traj, const UvcCertificate& cert);

/// sup_t ||u(t)|| ceilings implied by the control-budget blocks.
double vsc_control_ceiling(const VscCertificate& cert);
double uvc_control_ceiling(const UvcCertificate& cert);

}  // namespace reachtime
