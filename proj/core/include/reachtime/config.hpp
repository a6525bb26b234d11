#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "reachtime/model.hpp"
#include "reachtime/sim.hpp"

namespace reachtime {

struct SolverConfig {
  double tolerance = 1e-7;
  int max_iterations = 600;
};

struct SimSection {
  double dt = 1e-4;
  double horizon = 2.0;
  double reach_fraction = 1e-3;
  int hold_steps = 100;
  std::optional<Vec> weight_lambda;       // simplex weight for the run
  std::optional<std::size_t> weight_vertex;  // or a vertex index
  bool all_vertices = false;              // also run every vertex
};

/// Plant description: a named builder with parameters, or explicit vertices.
struct PlantSection {
  std::string builder;  // "servoing", "rov", or "" for explicit vertices
  double phi_bar = 0.0, delta_bar = 0.0;                       // servoing
  double m0 = 0.0, Iz = 0.0, psi1 = 0.0, psi2 = 0.0;           // rov
  double g_lo = 0.0, g_hi = 0.0;                               // rov
  std::vector<Matrix> vertices;                                // explicit
  double delta = 0.0;
};

struct ScenarioConfig {
  PlantSection plant;
  Vec sigma0;
  ControlKind kind = ControlKind::vsc_sign;
  std::optional<double> alpha_u;
  std::array<double, 2> rho_range{0.5, 20.0};
  int rho_grid_points = 40;
  SolverConfig solver;
  SimSection sim;
  std::optional<DisturbanceSpec> disturbance;
  std::uint64_t seed = 1;
  std::optional<Matrix> gain;  // inline gain for `simulate`
};

PolytopicPlant build_plant(const PlantSection& section);

struct SimAuditEntry {
  std::string label;  // "vertex0", "weight", ...
  std::optional<double> reach_time;
  double t_bound = 0.0;
  double control_peak = 0.0;
  double control_ceiling = 0.0;
  double lyapunov_max_increase = 0.0;
  double lyapunov_allowance = 0.0;
  bool pass = false;
};

struct PaperComparisonRow {
  std::string quantity;
  double reference = 0.0;
  double computed = 0.0;
  double rel_error = 0.0;
};

struct RunReport {
  std::string command;
  std::string case_id;
  ScenarioConfig resolved;
  std::optional<VscCertificate> vsc_certificate;
  std::optional<UvcCertificate> uvc_certificate;
  std::string solver_status;
  double solver_kkt = 0.0;
  int solver_iterations = 0;
  std::vector<SimAuditEntry> audits;
  std::vector<PaperComparisonRow> comparison;
  double synth_ms = 0.0;
  double sim_ms = 0.0;
  bool fixed_clock = false;
};

}  // namespace reachtime
