#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "pmflow/elliptic.hpp"
#include "pmflow/errors.hpp"
#include "pmflow/geometry.hpp"
#include "pmflow/mapping.hpp"
#include "pmflow/shock_curve.hpp"
#include "pmflow/solver_config.hpp"

namespace pmflow {

struct SolverResiduals {
  double rh_flux = std::numeric_limits<double>::infinity();
  double level_set = std::numeric_limits<double>::infinity();
  double elliptic = std::numeric_limits<double>::infinity();
  double cutoff_activity = 1.0;
};

struct FBPSolution {
  Geometry geometry;
  ShockCurve shock;
  SolverConfig config;
  int ns = 0, nt = 0;
  std::vector<double> phi;  // cell-centered pseudo-potential
  std::vector<double> psi;  // phi - max(phi_O, phi_N), same layout
  bool converged = false;
  SolverResiduals residuals;
  int outer_iterations = 0;
  int picard_iterations = 0;
  std::vector<double> beta_stages;
  std::vector<double> cutoff_history;  // per outer iteration, final stage
  double audit_fraction = 0.0;
};

// ---------------------------------------------------------------------
// Free boundary update
// ---------------------------------------------------------------------

// Newton step on the level set phi_inf - phi = 0 along vertical fibers:
// f <- f - (phi_inf - phi)/d_eta(phi_inf - phi), under-relaxed, endpoints
// pinned, then monotonized. Pure knot-array core; throws
// MonotonicityBreakdown when the transversality bound fails.
inline std::vector<double> newton_shock_values(
    const std::vector<double>& knots, const std::vector<double>& f_prev,
    const std::vector<double>& level, const std::vector<double>& deta,
    double relax, double eta_O, double eta_bar) {
  const size_t n = knots.size();
  std::vector<double> out(n);
  for (size_t k = 0; k < n; ++k) {
    if (k == 0) {
      out[k] = eta_O;
      continue;
    }
    if (k + 1 == n) {
      out[k] = eta_bar;
      continue;
    }
    if (!(deta[k] < 0.0)) {
      throw MonotonicityBreakdown(knots[k], deta[k]);
    }
    out[k] = f_prev[k] - relax * level[k] / deta[k];
  }
  monotonize_values(out);
  return out;
}

namespace detail {

// Linear interpolation of trace values (sampled at shock-fiber centers)
// onto knot abscissas, clamped at the ends.
inline double interp_clamped(const std::vector<double>& x,
                             const std::vector<double>& y, double q) {
  if (x.empty()) throw NumericalError("shock trace is empty");
  if (q <= x.front()) return y.front();
  if (q >= x.back()) return y.back();
  const size_t hi = static_cast<size_t>(
      std::upper_bound(x.begin(), x.end(), q) - x.begin());
  const size_t lo = hi - 1;
  const double w = (q - x[lo]) / (x[hi] - x[lo]);
  return (1.0 - w) * y[lo] + w * y[hi];
}

}  // namespace detail

// Rankine-Hugoniot residuals sampled at the shock knots: |phi - phi_inf|
// scaled by v eta_bar, and the one-sided flux mismatch scaled by v.
struct KnotResiduals {
  double level = 0.0;
  double flux = 0.0;
};

inline KnotResiduals knot_residuals(const EllipticSolver& solver,
                                    const std::vector<double>& psi,
                                    const ShockCurve& shock) {
  const auto tr = solver.trace_shock(psi);
  const Geometry& g = solver.geometry();
  KnotResiduals r;
  for (size_t k = 0; k < shock.knots.size(); ++k) {
    r.level = std::max(r.level,
                       std::abs(detail::interp_clamped(tr.xi, tr.level,
                                                       shock.knots[k])));
    r.flux = std::max(r.flux,
                      std::abs(detail::interp_clamped(
                          tr.xi, tr.flux_mismatch, shock.knots[k])));
  }
  r.level /= solver.scale();
  r.flux /= g.gas.v_inf;
  return r;
}

// Shock update from a solved field. The field is addressed through the
// solver that produced it so the boundary trace uses the matching mesh.
inline ShockCurve update_shock(const EllipticSolver& solver,
                               const std::vector<double>& psi,
                               const ShockCurve& prev,
                               const SolverConfig& cfg) {
  const Geometry& g = solver.geometry();
  const auto tr = solver.trace_shock(psi);
  std::vector<double> level(prev.knots.size()), deta(prev.knots.size());
  for (size_t k = 0; k < prev.knots.size(); ++k) {
    level[k] = detail::interp_clamped(tr.xi, tr.level, prev.knots[k]);
    deta[k] = detail::interp_clamped(tr.xi, tr.deta, prev.knots[k]);
  }
  ShockCurve next = prev;
  next.values = newton_shock_values(prev.knots, prev.values, level, deta,
                                    cfg.relax_shock, g.eta_O(), g.eta_bar);
  next.rebuild();
  return next;
}

// One frozen-coefficient elliptic solve as a standalone operation. phi is
// cell-centered on the mesh of (geometry, shock, config); returns the
// updated field.
inline std::vector<double> elliptic_step(const Geometry& g,
                                         const ShockCurve& sc,
                                         const std::vector<double>& phi_prev,
                                         const SolverConfig& cfg,
                                         StepDiagnostics* diag = nullptr) {
  EllipticSolver solver(g, sc, cfg);
  const auto& mesh = solver.mesh();
  std::vector<double> psi(phi_prev.size());
  for (int j = 0; j < mesh.nt; ++j) {
    for (int i = 0; i < mesh.ns; ++i) {
      const int k = mesh.cid(i, j);
      psi[k] = phi_prev[k] - solver.background().phi(mesh.center[k]);
    }
  }
  const StepDiagnostics d = solver.picard_step(psi);
  if (diag) *diag = d;
  std::vector<double> phi(psi.size());
  for (int j = 0; j < mesh.nt; ++j) {
    for (int i = 0; i < mesh.ns; ++i) {
      const int k = mesh.cid(i, j);
      phi[k] = solver.background().phi(mesh.center[k]) + psi[k];
    }
  }
  return phi;
}

// ---------------------------------------------------------------------
// Continuation driver
// ---------------------------------------------------------------------

namespace detail {

inline int shock_knot_count(const SolverConfig& cfg) {
  return std::max(9, cfg.n_s / 2 + 1);
}

// Initial shock at a new continuation stage: the previous normalized
// profile rescaled onto the new endpoints, or the straight chord when the
// previous stage was (numerically) flat.
inline ShockCurve remap_shock(const ShockCurve& prev, double prev_eta_O,
                              double prev_eta_bar, const Geometry& g,
                              int n_knots) {
  ShockCurve next = make_linear_shock(g.xi_O(), g.eta_O(), g.xi_N,
                                      g.eta_bar, n_knots);
  const double prev_rise = prev_eta_bar - prev_eta_O;
  if (std::abs(prev_rise) < 1e-10) return next;
  const double lo = prev.knots.front(), hi = prev.knots.back();
  for (int k = 0; k < n_knots; ++k) {
    const double tau = static_cast<double>(k) / (n_knots - 1);
    const double fr = (prev.eval(lo + tau * (hi - lo)) - prev_eta_O) /
                      prev_rise;
    next.values[k] = g.eta_O() + std::clamp(fr, 0.0, 1.0) *
                                      (g.eta_bar - g.eta_O());
  }
  monotonize_values(next.values);
  next.values.front() = g.eta_O();
  next.values.back() = g.eta_bar;
  next.rebuild();
  return next;
}

struct StageState {
  ShockCurve shock;
  std::vector<double> psi;
  double eta_O = 0.0, eta_bar = 0.0;
};

struct StageResult {
  bool converged = false;
  SolverResiduals residuals;
  int outer = 0;
  int picard = 0;
  std::vector<double> cutoff_history;
  double audit_fraction = 0.0;
};

// Alternates Picard solves of the cut elliptic problem with Newton updates
// of the free boundary until the knot residuals settle. The field is only
// polished to the elliptic tolerance once the boundary has stopped moving.
inline StageResult run_stage(const Geometry& g, const SolverConfig& cfg,
                             StageState& st, double tol_scale) {
  EllipticSolver solver(g, st.shock, cfg);
  StageResult res;
  const double tol_fp = cfg.tol_fixed_point * tol_scale;
  const double tol_el = cfg.tol_elliptic * tol_scale;
  const double shock_scale = std::max(g.eta_bar, 1e-300);
  double level_prev = 1.0;

  for (int outer = 0; outer < cfg.max_outer; ++outer) {
    ++res.outer;
    StepDiagnostics d{};
    const double inner_tol =
        std::max(tol_el, std::min(1e-3, 0.05 * level_prev));
    for (int inner = 0; inner < cfg.max_inner; ++inner) {
      d = solver.picard_step(st.psi);
      ++res.picard;
      if (d.update_norm < inner_tol) break;
    }
    res.cutoff_history.push_back(d.cutoff_fraction);
    res.audit_fraction = std::max(res.audit_fraction, d.audit_fraction);

    const ShockCurve next = update_shock(solver, st.psi, st.shock, cfg);
    double move = 0.0;
    for (size_t k = 0; k < next.values.size(); ++k) {
      move = std::max(move, std::abs(next.values[k] - st.shock.values[k]));
    }
    move /= shock_scale;
    st.shock = next;
    solver.set_shock(st.shock);

    const KnotResiduals kr = knot_residuals(solver, st.psi, st.shock);
    level_prev = std::max(kr.level, 1e-300);
    res.residuals.level_set = kr.level;
    res.residuals.rh_flux = kr.flux;
    res.residuals.cutoff_activity = d.cutoff_fraction;

    if (kr.level < tol_fp && move < tol_fp &&
        d.update_norm < std::max(tol_el, tol_fp)) {
      res.residuals.elliptic = solver.consistent_residual(st.psi, true);
      if (res.residuals.elliptic < tol_el && d.cutoff_fraction == 0.0) {
        res.converged = true;
        break;
      }
    }
  }
  if (!res.converged) {
    res.residuals.elliptic = solver.consistent_residual(st.psi, true);
  }
  st.eta_O = g.eta_O();
  st.eta_bar = g.eta_bar;
  return res;
}

}  // namespace detail

// Continuation in beta from the exact normal solution at beta = 0 up to
// beta_target. Steps halve on non-convergence down to 1/64 of the range;
// if the final stage still fails, the flagged unconverged solution is
// returned. MonotonicityBreakdown aborts (propagates).
inline FBPSolution solve_fbp(double v_inf, double beta_target, double gamma,
                             SolverConfig cfg) {
  cfg.validate();
  if (!(beta_target >= 0.0)) {
    throw std::domain_error("solve_fbp: beta_target must be >= 0");
  }
  // Validates (v_inf, beta_target) membership up front.
  (void)build_geometry(v_inf, beta_target, gamma);

  const int n_knots = detail::shock_knot_count(cfg);
  const int ncell = cfg.n_s * cfg.n_t;

  // Stage 0: the normal solution, exact by construction.
  Geometry g0 = build_geometry(v_inf, 0.0, gamma);
  detail::StageState st;
  st.shock = make_linear_shock(g0.xi_O(), g0.eta_O(), g0.xi_N, g0.eta_bar,
                               n_knots);
  st.psi.assign(static_cast<size_t>(ncell), 0.0);
  st.eta_O = g0.eta_O();
  st.eta_bar = g0.eta_bar;

  FBPSolution out;
  out.config = cfg;
  out.ns = cfg.n_s;
  out.nt = cfg.n_t;

  detail::StageResult last = detail::run_stage(g0, cfg, st, 1.0);
  Geometry g_last = g0;
  out.beta_stages.push_back(0.0);
  out.outer_iterations += last.outer;
  out.picard_iterations += last.picard;

  double beta_done = 0.0;
  double step = beta_target / cfg.beta_steps;
  const double floor_step = beta_target / 64.0;
  bool gave_up = false;

  while (beta_done < beta_target && !gave_up) {
    const double beta_try = std::min(beta_done + step, beta_target);
    const bool is_final = (beta_try == beta_target);
    Geometry g = build_geometry(v_inf, beta_try, gamma);
    detail::StageState attempt;
    attempt.psi = st.psi;
    attempt.shock = detail::remap_shock(st.shock, st.eta_O, st.eta_bar, g,
                                        n_knots);
    attempt.eta_O = st.eta_O;
    attempt.eta_bar = st.eta_bar;
    bool ok = false;
    detail::StageResult res;
    try {
      // Intermediate stages only feed the next initial iterate; solve them
      // to a loosened tolerance.
      res = detail::run_stage(g, cfg, attempt, is_final ? 1.0 : 100.0);
      ok = res.converged;
    } catch (const CavitationError&) {
      ok = false;
    } catch (const NumericalError&) {
      ok = false;
    }
    if (ok) {
      st = attempt;
      beta_done = beta_try;
      g_last = g;
      last = res;
      out.beta_stages.push_back(beta_try);
      out.outer_iterations += res.outer;
      out.picard_iterations += res.picard;
    } else {
      step *= 0.5;
      if (step < floor_step - 1e-300 || step <= 0.0) {
        // Report the best attempt at the target honestly as unconverged
        // if we cannot reach it; keep the last converged state otherwise.
        if (is_final) {
          st = attempt;
          g_last = g;
          last = res;
          out.beta_stages.push_back(beta_try);
          out.outer_iterations += res.outer;
          out.picard_iterations += res.picard;
          beta_done = beta_try;
        }
        gave_up = true;
      }
    }
  }

  out.geometry = g_last;
  out.shock = st.shock;
  out.converged = (beta_done == beta_target) && last.converged;
  out.residuals = last.residuals;
  out.cutoff_history = last.cutoff_history;
  out.audit_fraction = last.audit_fraction;

  // Materialize phi and the reference correction psi = phi - max(phi_O,
  // phi_N) on the final mesh.
  const FbpMesh mesh = make_mesh(g_last, st.shock, cfg.n_s, cfg.n_t);
  const Background bg = make_background(g_last);
  out.phi.resize(st.psi.size());
  out.psi.resize(st.psi.size());
  for (int j = 0; j < cfg.n_t; ++j) {
    for (int i = 0; i < cfg.n_s; ++i) {
      const int k = mesh.cid(i, j);
      const Point p = mesh.center[k];
      out.phi[k] = bg.phi(p) + st.psi[k];
      out.psi[k] = out.phi[k] - std::max(g_last.state_O.phi(p.xi, p.eta),
                                         g_last.state_N.phi(p.xi, p.eta));
    }
  }
  return out;
}

// ---------------------------------------------------------------------
// Field extraction
// ---------------------------------------------------------------------

struct SampledFields {
  std::vector<double> rho;
  std::vector<double> mach;   // |Dphi| / c
  std::vector<double> psi;
  std::vector<std::array<double, 2>> grad;  // Dphi at cell centers
};

// Computes derived nodal fields from a solution; cell centers are already
// physical-coordinate sample points.
inline SampledFields extract_fields(const FBPSolution& sol) {
  const FbpMesh mesh = make_mesh(sol.geometry, sol.shock, sol.ns, sol.nt);
  const Background bg = make_background(sol.geometry);
  EllipticSolver solver(sol.geometry, sol.shock, sol.config);
  std::vector<double> psi_corr(sol.phi.size());
  for (size_t k = 0; k < sol.phi.size(); ++k) {
    psi_corr[k] = sol.phi[k] - bg.phi(mesh.center[k]);
  }
  SampledFields f;
  const size_t n = sol.phi.size();
  f.rho.resize(n);
  f.mach.resize(n);
  f.psi = sol.psi;
  f.grad.resize(n);
  for (int j = 0; j < sol.nt; ++j) {
    for (int i = 0; i < sol.ns; ++i) {
      const int k = mesh.cid(i, j);
      const auto gc = solver.center_gradient(psi_corr, i, j);
      const auto gb = bg.grad(mesh.center[k]);
      const std::array<double, 2> g = {gc[0] + gb[0], gc[1] + gb[1]};
      f.grad[k] = g;
      const double s2 = g[0] * g[0] + g[1] * g[1];
      f.rho[k] = density_from_pseudo_bernoulli(s2, sol.phi[k],
                                               sol.geometry.gas);
      const double c2 =
          sound_speed_sq_from_state(s2, sol.phi[k], sol.geometry.gas);
      f.mach[k] = std::sqrt(s2 / c2);
    }
  }
  return f;
}

}  // namespace pmflow
