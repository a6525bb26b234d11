#include "reachtime/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include <json.hpp>

namespace reachtime {

using json = nlohmann::ordered_json;

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty() || !j.front().is_array())
    throw InvalidInputError("expected a matrix as an array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j.front().size();
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (j[i].size() != cols) throw InvalidInputError("ragged matrix rows in JSON");
    for (std::size_t c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  if (!m.all_finite()) throw InvalidInputError("matrix entries must be finite");
  return m;
}

json vec_to_json(const Vec& v) { return json(v); }

Vec vec_from_json(const json& j) {
  if (!j.is_array()) throw InvalidInputError("expected a numeric array");
  Vec v;
  v.reserve(j.size());
  for (const auto& e : j) v.push_back(e.get<double>());
  return v;
}

json disturbance_to_json(const DisturbanceSpec& d) {
  json channels = json::array();
  for (const auto& ch : d.channels) {
    json terms = json::array();
    for (const auto& t : ch)
      terms.push_back(json{{"amplitude", t.amplitude},
                           {"frequency", t.frequency},
                           {"phase", t.phase}});
    channels.push_back(std::move(terms));
  }
  return json{{"bound", d.bound}, {"offsets", vec_to_json(d.offsets)},
              {"channels", std::move(channels)}};
}

DisturbanceSpec disturbance_from_json(const json& j) {
  DisturbanceSpec d;
  d.bound = j.at("bound").get<double>();
  d.offsets = vec_from_json(j.at("offsets"));
  for (const auto& ch : j.at("channels")) {
    std::vector<SinusoidTerm> terms;
    for (const auto& t : ch)
      terms.push_back(SinusoidTerm{t.at("amplitude").get<double>(),
                                   t.at("frequency").get<double>(),
                                   t.at("phase").get<double>()});
    d.channels.push_back(std::move(terms));
  }
  if (d.channels.size() != d.offsets.size())
    throw InvalidInputError("disturbance: channel/offset count mismatch");
  return d;
}

json plant_to_json(const PlantSection& p) {
  json j;
  if (p.builder == "servoing") {
    j["builder"] = "servoing";
    j["phi_bar"] = p.phi_bar;
    j["delta_bar"] = p.delta_bar;
  } else if (p.builder == "rov") {
    j["builder"] = "rov";
    j["m0"] = p.m0;
    j["Iz"] = p.Iz;
    j["psi1"] = p.psi1;
    j["psi2"] = p.psi2;
    j["g_lo"] = p.g_lo;
    j["g_hi"] = p.g_hi;
  } else {
    json verts = json::array();
    for (const auto& v : p.vertices) verts.push_back(matrix_to_json(v));
    j["vertices"] = std::move(verts);
  }
  j["delta"] = p.delta;
  return j;
}

PlantSection plant_from_json(const json& j) {
  PlantSection p;
  if (j.contains("builder")) {
    p.builder = j.at("builder").get<std::string>();
    if (p.builder == "servoing") {
      p.phi_bar = j.at("phi_bar").get<double>();
      p.delta_bar = j.at("delta_bar").get<double>();
    } else if (p.builder == "rov") {
      p.m0 = j.at("m0").get<double>();
      p.Iz = j.at("Iz").get<double>();
      p.psi1 = j.at("psi1").get<double>();
      p.psi2 = j.at("psi2").get<double>();
      p.g_lo = j.at("g_lo").get<double>();
      p.g_hi = j.at("g_hi").get<double>();
    } else {
      throw InvalidInputError("unknown plant builder: " + p.builder);
    }
  } else if (j.contains("vertices")) {
    for (const auto& v : j.at("vertices")) p.vertices.push_back(matrix_from_json(v));
  } else {
    throw InvalidInputError("plant needs either a builder or explicit vertices");
  }
  p.delta = j.at("delta").get<double>();
  return p;
}

json vsc_cert_to_json(const VscCertificate& c) {
  json j;
  j["kind"] = "vsc";
  j["zd"] = matrix_to_json(c.zd);
  j["y"] = matrix_to_json(c.y);
  j["beta"] = c.beta;
  j["theta"] = c.theta;
  j["gain"] = matrix_to_json(c.gain);
  j["t_bound"] = c.t_bound;
  if (c.alpha_u) j["alpha_u"] = *c.alpha_u;
  j["delta"] = c.delta;
  j["margin"] = c.margin;
  j["hull_audit_worst"] = c.hull_audit_worst;
  j["conditioning_warning"] = c.conditioning_warning;
  return j;
}

VscCertificate vsc_cert_from_json(const json& j) {
  VscCertificate c;
  c.zd = matrix_from_json(j.at("zd"));
  c.y = matrix_from_json(j.at("y"));
  c.beta = j.at("beta").get<double>();
  c.theta = j.at("theta").get<double>();
  c.gain = matrix_from_json(j.at("gain"));
  c.t_bound = j.at("t_bound").get<double>();
  if (j.contains("alpha_u")) c.alpha_u = j.at("alpha_u").get<double>();
  c.delta = j.at("delta").get<double>();
  c.margin = j.value("margin", 0.0);
  c.hull_audit_worst = j.value("hull_audit_worst", 0.0);
  c.conditioning_warning = j.value("conditioning_warning", false);
  return c;
}

json uvc_cert_to_json(const UvcCertificate& c) {
  json j;
  j["kind"] = "uvc";
  j["z"] = matrix_to_json(c.z.mat());
  j["y"] = matrix_to_json(c.y);
  j["mu"] = c.mu;
  j["rho"] = c.rho;
  j["theta"] = c.theta;
  j["gain"] = matrix_to_json(c.gain);
  j["t_bound"] = c.t_bound;
  if (c.alpha_u) j["alpha_u"] = *c.alpha_u;
  j["delta"] = c.delta;
  j["margin"] = c.margin;
  j["hull_audit_worst"] = c.hull_audit_worst;
  j["conditioning_warning"] = c.conditioning_warning;
  return j;
}

UvcCertificate uvc_cert_from_json(const json& j) {
  UvcCertificate c;
  c.z = SymMatrix(matrix_from_json(j.at("z")));
  c.y = matrix_from_json(j.at("y"));
  c.mu = j.at("mu").get<double>();
  c.rho = j.at("rho").get<double>();
  c.theta = j.at("theta").get<double>();
  c.gain = matrix_from_json(j.at("gain"));
  c.t_bound = j.at("t_bound").get<double>();
  if (j.contains("alpha_u")) c.alpha_u = j.at("alpha_u").get<double>();
  c.delta = j.at("delta").get<double>();
  c.margin = j.value("margin", 0.0);
  c.hull_audit_worst = j.value("hull_audit_worst", 0.0);
  c.conditioning_warning = j.value("conditioning_warning", false);
  return c;
}

json config_to_json_obj(const ScenarioConfig& cfg) {
  json j;
  j["plant"] = plant_to_json(cfg.plant);
  j["sigma0"] = vec_to_json(cfg.sigma0);
  j["control"] = to_string(cfg.kind);
  if (cfg.alpha_u) j["alpha_u"] = *cfg.alpha_u;
  j["rho_range"] = json::array({cfg.rho_range[0], cfg.rho_range[1]});
  j["rho_grid_points"] = cfg.rho_grid_points;
  j["solver"] = json{{"tolerance", cfg.solver.tolerance},
                     {"max_iterations", cfg.solver.max_iterations}};
  json sim;
  sim["dt"] = cfg.sim.dt;
  sim["horizon"] = cfg.sim.horizon;
  sim["reach_fraction"] = cfg.sim.reach_fraction;
  sim["hold_steps"] = cfg.sim.hold_steps;
  if (cfg.sim.weight_lambda) sim["weight"] = json{{"lambda", vec_to_json(*cfg.sim.weight_lambda)}};
  if (cfg.sim.weight_vertex) sim["weight"] = json{{"vertex", *cfg.sim.weight_vertex}};
  sim["all_vertices"] = cfg.sim.all_vertices;
  j["sim"] = std::move(sim);
  if (cfg.disturbance) j["disturbance"] = disturbance_to_json(*cfg.disturbance);
  j["seed"] = cfg.seed;
  if (cfg.gain) j["gain"] = matrix_to_json(*cfg.gain);
  return j;
}

ScenarioConfig config_from_json_obj(const json& j) {
  ScenarioConfig cfg;
  cfg.plant = plant_from_json(j.at("plant"));
  cfg.sigma0 = vec_from_json(j.at("sigma0"));
  const std::string kind = j.at("control").get<std::string>();
  if (kind == "vsc") cfg.kind = ControlKind::vsc_sign;
  else if (kind == "uvc") cfg.kind = ControlKind::uvc_unit_vector;
  else throw InvalidInputError("control must be \"vsc\" or \"uvc\"");
  if (j.contains("alpha_u")) cfg.alpha_u = j.at("alpha_u").get<double>();
  if (j.contains("rho_range")) {
    const auto& r = j.at("rho_range");
    if (!r.is_array() || r.size() != 2)
      throw InvalidInputError("rho_range must be [lo, hi]");
    cfg.rho_range = {r[0].get<double>(), r[1].get<double>()};
  }
  cfg.rho_grid_points = j.value("rho_grid_points", 40);
  if (j.contains("solver")) {
    cfg.solver.tolerance = j.at("solver").value("tolerance", 1e-7);
    cfg.solver.max_iterations = j.at("solver").value("max_iterations", 600);
  }
  if (j.contains("sim")) {
    const auto& s = j.at("sim");
    cfg.sim.dt = s.value("dt", 1e-4);
    cfg.sim.horizon = s.value("horizon", 2.0);
    cfg.sim.reach_fraction = s.value("reach_fraction", 1e-3);
    cfg.sim.hold_steps = s.value("hold_steps", 100);
    cfg.sim.all_vertices = s.value("all_vertices", false);
    if (s.contains("weight")) {
      const auto& w = s.at("weight");
      if (w.contains("lambda")) cfg.sim.weight_lambda = vec_from_json(w.at("lambda"));
      else if (w.contains("vertex")) cfg.sim.weight_vertex = w.at("vertex").get<std::size_t>();
      else throw InvalidInputError("sim.weight needs \"lambda\" or \"vertex\"");
    }
  }
  if (j.contains("disturbance")) cfg.disturbance = disturbance_from_json(j.at("disturbance"));
  cfg.seed = j.value("seed", std::uint64_t{1});
  if (j.contains("gain")) cfg.gain = matrix_from_json(j.at("gain"));
  return cfg;
}

}  // namespace

PolytopicPlant build_plant(const PlantSection& p) {
  if (p.builder == "servoing") return make_servoing_plant(p.phi_bar, p.delta_bar, p.delta);
  if (p.builder == "rov")
    return make_rov_plant(p.m0, p.Iz, p.psi1, p.psi2, p.g_lo, p.g_hi, p.delta);
  if (!p.builder.empty()) throw InvalidInputError("unknown plant builder: " + p.builder);
  return PolytopicPlant(p.vertices, p.delta);
}

ScenarioConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw InvalidInputError(std::string("config JSON parse error: ") + e.what());
  }
  try {
    return config_from_json_obj(j);
  } catch (const json::exception& e) {
    throw InvalidInputError(std::string("config schema error: ") + e.what());
  }
}

std::string config_to_json(const ScenarioConfig& cfg) {
  return config_to_json_obj(cfg).dump(2) + "\n";
}

std::string report_to_json(const RunReport& r) {
  json j;
  j["command"] = r.command;
  if (!r.case_id.empty()) j["case"] = r.case_id;
  j["config"] = config_to_json_obj(r.resolved);
  if (r.vsc_certificate) j["certificate"] = vsc_cert_to_json(*r.vsc_certificate);
  else if (r.uvc_certificate) j["certificate"] = uvc_cert_to_json(*r.uvc_certificate);
  else j["certificate"] = nullptr;
  j["solver"] = json{{"status", r.solver_status},
                     {"kkt_residual", r.solver_kkt},
                     {"newton_iterations", r.solver_iterations}};
  json audits = json::array();
  for (const auto& a : r.audits) {
    json e;
    e["label"] = a.label;
    if (a.reach_time) e["reach_time"] = *a.reach_time;
    else e["reach_time"] = nullptr;
    e["t_bound"] = a.t_bound;
    e["control_peak"] = a.control_peak;
    e["control_ceiling"] = std::isfinite(a.control_ceiling) ? json(a.control_ceiling) : json(nullptr);
    e["lyapunov_max_increase"] = a.lyapunov_max_increase;
    e["lyapunov_allowance"] = a.lyapunov_allowance;
    e["pass"] = a.pass;
    audits.push_back(std::move(e));
  }
  j["audits"] = std::move(audits);
  if (!r.comparison.empty()) {
    json rows = json::array();
    for (const auto& c : r.comparison)
      rows.push_back(json{{"quantity", c.quantity},
                          {"reference", c.reference},
                          {"computed", c.computed},
                          {"rel_error", c.rel_error}});
    j["comparison"] = std::move(rows);
  }
  j["timings_ms"] = json{{"synth", r.fixed_clock ? 0.0 : r.synth_ms},
                         {"sim", r.fixed_clock ? 0.0 : r.sim_ms}};
  return j.dump(2) + "\n";
}

RunReport report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw InvalidInputError(std::string("report JSON parse error: ") + e.what());
  }
  RunReport r;
  r.command = j.value("command", "");
  r.case_id = j.value("case", "");
  r.resolved = config_from_json_obj(j.at("config"));
  if (j.contains("certificate") && !j.at("certificate").is_null()) {
    const auto& c = j.at("certificate");
    if (c.at("kind") == "vsc") r.vsc_certificate = vsc_cert_from_json(c);
    else r.uvc_certificate = uvc_cert_from_json(c);
  }
  if (j.contains("solver")) {
    r.solver_status = j.at("solver").value("status", "");
    r.solver_kkt = j.at("solver").value("kkt_residual", 0.0);
    r.solver_iterations = j.at("solver").value("newton_iterations", 0);
  }
  return r;
}

std::string program_to_json(const LinearMatrixProgram& prog) {
  json j;
  j["var_count"] = prog.var_count;
  j["objective"] = vec_to_json(prog.objective);
  json blocks = json::array();
  for (const auto& b : prog.blocks) {
    json e;
    e["constant"] = matrix_to_json(b.constant.mat());
    json coeffs = json::array();
    for (const auto& c : b.coefficients)
      coeffs.push_back(c.order() == 0 ? json(nullptr) : matrix_to_json(c.mat()));
    e["coefficients"] = std::move(coeffs);
    blocks.push_back(std::move(e));
  }
  j["blocks"] = std::move(blocks);
  return j.dump(2) + "\n";
}

namespace {

void put_number(std::ostream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  os << buf;
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const std::size_t n = traj.states.empty() ? 0 : traj.states.front().size();
  const std::size_t m = traj.controls.empty() ? 0 : traj.controls.front().size();
  os << "t";
  for (std::size_t j = 0; j < n; ++j) os << ",sigma" << (j + 1);
  for (std::size_t j = 0; j < m; ++j) os << ",u" << (j + 1);
  os << ",u_norm,v\n";
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    put_number(os, traj.times[k]);
    for (std::size_t j = 0; j < n; ++j) {
      os << ',';
      put_number(os, traj.states[k][j]);
    }
    for (std::size_t j = 0; j < m; ++j) {
      os << ',';
      put_number(os, traj.controls[k][j]);
    }
    os << ',';
    put_number(os, traj.control_norms[k]);
    os << ',';
    put_number(os, k < traj.lyapunov.size() ? traj.lyapunov[k]
                                            : std::numeric_limits<double>::quiet_NaN());
    os << '\n';
  }
}

void write_rho_sweep_csv(std::ostream& os, const RhoSweep& sweep) {
  os << "rho,theta,feasible\n";
  for (const auto& p : sweep.points) {
    put_number(os, p.rho);
    os << ',';
    put_number(os, p.feasible ? p.theta : std::numeric_limits<double>::quiet_NaN());
    os << ',' << (p.feasible ? 1 : 0) << '\n';
  }
}

}  // namespace reachtime
