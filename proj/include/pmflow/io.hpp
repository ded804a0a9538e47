#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pmflow/geometry.hpp"
#include "pmflow/solver.hpp"
#include "pmflow/solver_config.hpp"
#include "pmflow/verify.hpp"

namespace pmflow {

using json = nlohmann::json;

// 17 significant digits, '.' decimal separator, no locale dependence:
// identical configs must produce byte-identical files.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_text_file(const std::string& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

// ---------------------------------------------------------------------
// Geometry JSON, schema "geometry/1"
// ---------------------------------------------------------------------

inline json to_json(const UniformState& st) {
  return json{{"u", st.u}, {"v", st.v}, {"k", st.k},
              {"rho", st.rho}, {"c", st.c}};
}

inline UniformState uniform_state_from_json(const json& j) {
  UniformState st;
  st.u = j.at("u");
  st.v = j.at("v");
  st.k = j.at("k");
  st.rho = j.at("rho");
  st.c = j.at("c");
  return st;
}

inline json to_json(const Geometry& g) {
  json j;
  j["schema"] = "geometry/1";
  j["gamma"] = g.gas.gamma;
  j["v_inf"] = g.gas.v_inf;
  j["B"] = g.gas.B;
  j["B0"] = g.gas.B0();
  j["beta"] = g.beta;
  j["state_inf"] = to_json(g.state_inf);
  j["state_O"] = to_json(g.state_O);
  j["state_N"] = to_json(g.state_N);
  if (g.has_oblique()) {
    j["xi_tilde"] = g.xi_tilde;
  } else {
    j["xi_tilde"] = nullptr;  // S_O absent at beta = 0
  }
  j["eta_bar"] = g.eta_bar;
  j["xi_N"] = g.xi_N;
  j["P1"] = {g.P1.xi, g.P1.eta};
  j["P2"] = {g.P2.xi, g.P2.eta};
  j["wedge"] = {g.wedge_lo, g.wedge_hi};
  return j;
}

inline Geometry geometry_from_json(const json& j) {
  if (j.at("schema") != "geometry/1") {
    throw std::runtime_error("geometry_from_json: unexpected schema tag");
  }
  Geometry g;
  g.gas = GasSetup::wedge_frame(j.at("gamma"), j.at("v_inf"));
  g.beta = j.at("beta");
  g.state_inf = uniform_state_from_json(j.at("state_inf"));
  g.state_O = uniform_state_from_json(j.at("state_O"));
  g.state_N = uniform_state_from_json(j.at("state_N"));
  g.xi_tilde = j.at("xi_tilde").is_null()
                   ? std::numeric_limits<double>::quiet_NaN()
                   : j.at("xi_tilde").get<double>();
  g.eta_bar = j.at("eta_bar");
  g.xi_N = j.at("xi_N");
  g.P1 = {j.at("P1")[0], j.at("P1")[1]};
  g.P2 = {j.at("P2")[0], j.at("P2")[1]};
  g.wedge_lo = j.at("wedge")[0];
  g.wedge_hi = j.at("wedge")[1];
  validate(g);
  return g;
}

// ---------------------------------------------------------------------
// SolverConfig JSON, schema "solverconfig/1"
// ---------------------------------------------------------------------

inline json to_json(const SolverConfig& c) {
  return json{{"schema", "solverconfig/1"},
              {"n_s", c.n_s},
              {"n_t", c.n_t},
              {"cutoff_delta", c.cutoff_delta},
              {"cutoff_band", c.cutoff_band},
              {"relax_shock", c.relax_shock},
              {"relax_field", c.relax_field},
              {"tol_elliptic", c.tol_elliptic},
              {"tol_fixed_point", c.tol_fixed_point},
              {"max_outer", c.max_outer},
              {"max_inner", c.max_inner},
              {"beta_steps", c.beta_steps}};
}

inline SolverConfig solver_config_from_json(const json& j) {
  if (j.contains("schema") && j.at("schema") != "solverconfig/1") {
    throw std::runtime_error("solver_config_from_json: unexpected schema");
  }
  SolverConfig c;
  c.n_s = j.value("n_s", c.n_s);
  c.n_t = j.value("n_t", c.n_t);
  c.cutoff_delta = j.value("cutoff_delta", c.cutoff_delta);
  c.cutoff_band = j.value("cutoff_band", c.cutoff_band);
  c.relax_shock = j.value("relax_shock", c.relax_shock);
  c.relax_field = j.value("relax_field", c.relax_field);
  c.tol_elliptic = j.value("tol_elliptic", c.tol_elliptic);
  c.tol_fixed_point = j.value("tol_fixed_point", c.tol_fixed_point);
  c.max_outer = j.value("max_outer", c.max_outer);
  c.max_inner = j.value("max_inner", c.max_inner);
  c.beta_steps = j.value("beta_steps", c.beta_steps);
  c.validate();
  return c;
}

// ---------------------------------------------------------------------
// FBPSolution artifacts: solution CSV, shock CSV, run-report JSON
// ---------------------------------------------------------------------

inline std::string solution_csv(const FBPSolution& sol) {
  const FbpMesh mesh = make_mesh(sol.geometry, sol.shock, sol.ns, sol.nt);
  const SampledFields f = extract_fields(sol);
  std::string out = "xi,eta,phi,psi,rho,mach\n";
  for (int j = 0; j < sol.nt; ++j) {
    for (int i = 0; i < sol.ns; ++i) {
      const int k = mesh.cid(i, j);
      out += fmt17(mesh.center[k].xi) + "," + fmt17(mesh.center[k].eta) +
             "," + fmt17(sol.phi[k]) + "," + fmt17(sol.psi[k]) + "," +
             fmt17(f.rho[k]) + "," + fmt17(f.mach[k]) + "\n";
    }
  }
  return out;
}

inline std::string shock_csv(const FBPSolution& sol) {
  std::string out = "xi,f,fprime\n";
  for (size_t k = 0; k < sol.shock.knots.size(); ++k) {
    const double xi = sol.shock.knots[k];
    out += fmt17(xi) + "," + fmt17(sol.shock.values[k]) + "," +
           fmt17(sol.shock.deriv(xi)) + "\n";
  }
  return out;
}

inline json report_json(const FBPSolution& sol) {
  json j;
  j["schema"] = "report/1";
  j["converged"] = sol.converged;
  j["grid"] = {{"n_s", sol.ns}, {"n_t", sol.nt}};
  j["residuals"] = {{"rh_flux", sol.residuals.rh_flux},
                    {"level_set", sol.residuals.level_set},
                    {"elliptic", sol.residuals.elliptic},
                    {"cutoff_activity", sol.residuals.cutoff_activity}};
  j["iterations"] = {{"outer", sol.outer_iterations},
                     {"picard", sol.picard_iterations}};
  j["beta_stages"] = sol.beta_stages;
  j["cutoff_activity_history"] = sol.cutoff_history;
  j["matrix_audit_fraction"] = sol.audit_fraction;
  j["geometry"] = to_json(sol.geometry);
  j["config"] = to_json(sol.config);
  json knots = json::array(), values = json::array();
  for (size_t k = 0; k < sol.shock.knots.size(); ++k) {
    knots.push_back(sol.shock.knots[k]);
    values.push_back(sol.shock.values[k]);
  }
  j["shock"] = {{"knots", knots}, {"values", values}};
  return j;
}

// Rebuilds a solution from a run directory's report.json + solution.csv.
inline FBPSolution solution_from_run_dir(const std::string& dir) {
  const json rep = json::parse(read_text_file(dir + "/report.json"));
  if (rep.at("schema") != "report/1") {
    throw std::runtime_error("solution_from_run_dir: unexpected schema");
  }
  FBPSolution sol;
  sol.geometry = geometry_from_json(rep.at("geometry"));
  sol.config = solver_config_from_json(rep.at("config"));
  sol.ns = rep.at("grid").at("n_s");
  sol.nt = rep.at("grid").at("n_t");
  sol.converged = rep.at("converged");
  sol.residuals.rh_flux = rep.at("residuals").at("rh_flux");
  sol.residuals.level_set = rep.at("residuals").at("level_set");
  sol.residuals.elliptic = rep.at("residuals").at("elliptic");
  sol.residuals.cutoff_activity = rep.at("residuals").at("cutoff_activity");
  sol.shock.knots = rep.at("shock").at("knots").get<std::vector<double>>();
  sol.shock.values = rep.at("shock").at("values").get<std::vector<double>>();
  sol.shock.rebuild();
  for (double b : rep.at("beta_stages")) sol.beta_stages.push_back(b);

  const std::string csv = read_text_file(dir + "/solution.csv");
  sol.phi.assign(static_cast<size_t>(sol.ns) * sol.nt, 0.0);
  sol.psi.assign(static_cast<size_t>(sol.ns) * sol.nt, 0.0);
  size_t pos = csv.find('\n');  // skip header
  size_t row = 0;
  while (pos != std::string::npos && pos + 1 < csv.size() &&
         row < sol.phi.size()) {
    const size_t eol = csv.find('\n', pos + 1);
    const std::string line = csv.substr(pos + 1, eol - pos - 1);
    double xi, eta, phi, psi, rho, mach;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf", &xi, &eta,
                    &phi, &psi, &rho, &mach) == 6) {
      sol.phi[row] = phi;
      sol.psi[row] = psi;
      ++row;
    }
    pos = eol;
  }
  if (row != sol.phi.size()) {
    throw std::runtime_error("solution_from_run_dir: row count mismatch");
  }
  return sol;
}

// ---------------------------------------------------------------------
// Verification JSON, schema "verify/1"
// ---------------------------------------------------------------------

inline json to_json(const CheckReport& r) {
  json j;
  j["name"] = r.name;
  j["passed"] = r.passed;
  j["worst_violation"] = r.worst_violation;
  if (r.has_location) {
    j["location"] = {r.location.xi, r.location.eta};
  } else {
    j["location"] = "n/a";
  }
  j["tolerance_used"] = r.tolerance_used;
  j["notes"] = r.notes;
  return j;
}

inline json verification_json(const std::vector<CheckReport>& checks,
                              const json& metadata) {
  json arr = json::array();
  for (const auto& r : checks) arr.push_back(to_json(r));
  return json{{"schema", "verify/1"}, {"checks", arr},
              {"metadata", metadata}};
}

}  // namespace pmflow
