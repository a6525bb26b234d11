#pragma once

#include <iosfwd>
#include <string>

#include "reachtime/config.hpp"
#include "reachtime/sdp.hpp"

namespace reachtime {

// JSON round trips exposed as strings so the library does not leak its JSON
// implementation into the public headers. Schemas are documented in the
// project README.

ScenarioConfig config_from_json(const std::string& text);
std::string config_to_json(const ScenarioConfig& cfg);

std::string report_to_json(const RunReport& report);
RunReport report_from_json(const std::string& text);

std::string program_to_json(const LinearMatrixProgram& prog);

/// t, sigma_1..sigma_n, u_1..u_m, ||u||, v with 12 significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

/// rho, theta, feasible (theta = nan on infeasible rows).
void write_rho_sweep_csv(std::ostream& os, const RhoSweep& sweep);

}  // namespace reachtime
