#pragma once

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "pmflow/errors.hpp"
#include "pmflow/gas.hpp"
#include "pmflow/geometry.hpp"
#include "pmflow/mapping.hpp"
#include "pmflow/shock_curve.hpp"
#include "pmflow/solver_config.hpp"

namespace pmflow {

// ---------------------------------------------------------------------
// Smooth background potential
// ---------------------------------------------------------------------
//
// The discrete unknown is the correction phi - Phi_bg, where Phi_bg blends
// the two uniform states across a strip strictly between the sonic arcs:
// Phi_bg = w(xi) phi_O + (1-w) phi_N. Near each arc Phi_bg equals that
// arc's own state, so the correction carries Dirichlet data 0 there and
// uniform states are exact discrete solutions.
struct Background {
  UniformState O, N;
  double xi_a = 0.0, xi_b = 1.0;

  double w(double xi) const {
    if (xi <= xi_a) return 1.0;
    if (xi >= xi_b) return 0.0;
    const double u = (xi - xi_a) / (xi_b - xi_a);
    return 1.0 - u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
  }
  double wprime(double xi) const {
    if (xi <= xi_a || xi >= xi_b) return 0.0;
    const double u = (xi - xi_a) / (xi_b - xi_a);
    return -30.0 * u * u * (1.0 + u * (-2.0 + u)) / (xi_b - xi_a);
  }
  double phi(Point p) const {
    const double ww = w(p.xi);
    return ww * O.phi(p.xi, p.eta) + (1.0 - ww) * N.phi(p.xi, p.eta);
  }
  std::array<double, 2> grad(Point p) const {
    const double ww = w(p.xi);
    const auto go = O.grad(p.xi, p.eta);
    const auto gn = N.grad(p.xi, p.eta);
    const double dphi = O.phi(p.xi, p.eta) - N.phi(p.xi, p.eta);
    return {ww * go[0] + (1.0 - ww) * gn[0] + wprime(p.xi) * dphi,
            ww * go[1] + (1.0 - ww) * gn[1]};
  }
};

inline Background make_background(const Geometry& g) {
  Background bg;
  bg.O = g.state_O;
  bg.N = g.state_N;
  const double span = g.xi_N - g.xi_O();
  bg.xi_a = g.xi_O() + 0.3 * span;
  bg.xi_b = g.xi_O() + 0.7 * span;
  return bg;
}

// ---------------------------------------------------------------------
// Sonic neighborhoods and the ellipticity cutoff
// ---------------------------------------------------------------------
//
// In the (x, y) coordinates of either arc (x = c - r), the coefficient
// argument psi_x is replaced by min(psi_x, (2-delta)/(1+gamma) x). Both
// uniform backgrounds have radial derivative -r about their own centers,
// so psi_x = -(phi_r + r) regardless of which state is subtracted.
struct SonicBands {
  double eps = 0.0;
  double delta = 0.2;
  double gamma = 1.4;
  double c_O = 1.0, u_O = 0.0, y_O_max = 0.0;
  double c_N = 1.0, y_N_max = 0.0;

  double slope_bound(double x) const {
    return (2.0 - delta) / (1.0 + gamma) * x;
  }

  // 0 = outside both bands, 1 = left band, 2 = right band.
  int band(Point p, double* x_out = nullptr) const {
    constexpr double pi = 3.141592653589793;
    double x_l = -1.0, x_r = -1.0;
    {
      const double r = std::hypot(p.xi - u_O, p.eta);
      const double x = c_O - r;
      const double y = pi - std::atan2(p.eta, p.xi - u_O);
      const double ym = eps / c_O;
      if (x >= 0.0 && x < eps && y >= -ym && y <= y_O_max + ym) x_l = x;
    }
    {
      const double r = std::hypot(p.xi, p.eta);
      const double x = c_N - r;
      const double y = std::atan2(p.eta, p.xi);
      const double ym = eps / c_N;
      if (x >= 0.0 && x < eps && y >= -ym && y <= y_N_max + ym) x_r = x;
    }
    if (x_l < 0.0 && x_r < 0.0) return 0;
    if (x_r < 0.0 || (x_l >= 0.0 && x_l <= x_r)) {
      if (x_out) *x_out = x_l;
      return 1;
    }
    if (x_out) *x_out = x_r;
    return 2;
  }

  // psi_x in the band's (x,y) coordinates from a full physical gradient.
  double psi_x(Point p, const std::array<double, 2>& grad, int b) const {
    const double cx = (b == 1) ? u_O : 0.0;
    const double r = std::hypot(p.xi - cx, p.eta);
    const double phi_r = (grad[0] * (p.xi - cx) + grad[1] * p.eta) / r;
    return -(phi_r + r);
  }

  // Clamps the radial derivative in place; returns {in_band, clamped}.
  std::pair<bool, bool> clamp(Point p, std::array<double, 2>& grad) const {
    double x = 0.0;
    const int b = band(p, &x);
    if (b == 0) return {false, false};
    const double cx = (b == 1) ? u_O : 0.0;
    const double r = std::hypot(p.xi - cx, p.eta);
    if (r < 1e-14) return {true, false};
    const std::array<double, 2> er = {(p.xi - cx) / r, p.eta / r};
    const double phi_r = grad[0] * er[0] + grad[1] * er[1];
    const double px = -(phi_r + r);
    const double s_max = slope_bound(x);
    if (px <= s_max) return {true, false};
    const double phi_r_cut = -(r + s_max);
    grad[0] += (phi_r_cut - phi_r) * er[0];
    grad[1] += (phi_r_cut - phi_r) * er[1];
    return {true, true};
  }
};

inline SonicBands make_bands(const Geometry& g, const SolverConfig& cfg) {
  constexpr double pi = 3.141592653589793;
  SonicBands b;
  b.delta = cfg.cutoff_delta;
  b.gamma = g.gas.gamma;
  b.c_O = g.state_O.c;
  b.u_O = g.state_O.u;
  b.c_N = g.state_N.c;
  b.y_O_max = pi - std::atan2(g.P1.eta, g.P1.xi - g.state_O.u);
  b.y_N_max = std::atan2(g.P2.eta, g.P2.xi);
  b.eps = cfg.cutoff_band > 0.0 ? cfg.cutoff_band
                                : 0.15 * std::min(b.c_O, b.c_N);
  // Keep the bands clear of the background blend strip.
  const Background bg = make_background(g);
  const double gap = std::min(bg.xi_a - g.xi_O(), g.xi_N - bg.xi_b);
  if (b.eps > 0.9 * gap) b.eps = 0.9 * gap;
  return b;
}

// ---------------------------------------------------------------------
// Structured quadrilateral mesh over the mapped rectangle
// ---------------------------------------------------------------------

struct FbpMesh {
  int ns = 0, nt = 0;
  DomainMapping map;
  std::vector<Point> corner;  // (ns+1) x (nt+1)
  std::vector<Point> center;  // ns x nt
  std::vector<double> area;   // exact quad areas

  int cid(int i, int j) const { return j * ns + i; }
  int vid(int i, int j) const { return j * (ns + 1) + i; }
  double ds() const { return 2.0 / ns; }
  double dt() const { return 1.0 / nt; }
  double s_center(int i) const { return -1.0 + (i + 0.5) * ds(); }
  double t_center(int j) const { return (j + 0.5) * dt(); }
};

inline FbpMesh make_mesh(const Geometry& g, const ShockCurve& sc, int ns,
                         int nt) {
  FbpMesh m;
  m.ns = ns;
  m.nt = nt;
  m.map = make_mapping(g, sc);
  m.corner.resize(static_cast<size_t>(ns + 1) * (nt + 1));
  for (int j = 0; j <= nt; ++j) {
    for (int i = 0; i <= ns; ++i) {
      m.corner[m.vid(i, j)] = m.map.to_physical(-1.0 + i * m.ds(),
                                                j * m.dt());
    }
  }
  m.center.resize(static_cast<size_t>(ns) * nt);
  m.area.resize(static_cast<size_t>(ns) * nt);
  for (int j = 0; j < nt; ++j) {
    for (int i = 0; i < ns; ++i) {
      m.center[m.cid(i, j)] = m.map.to_physical(m.s_center(i),
                                                m.t_center(j));
      const Point& a = m.corner[m.vid(i, j)];
      const Point& b = m.corner[m.vid(i + 1, j)];
      const Point& c = m.corner[m.vid(i + 1, j + 1)];
      const Point& d = m.corner[m.vid(i, j + 1)];
      m.area[m.cid(i, j)] = 0.5 * std::abs((c.xi - a.xi) * (d.eta - b.eta) -
                                           (d.xi - b.xi) * (c.eta - a.eta));
    }
  }
  return m;
}

// ---------------------------------------------------------------------
// Frozen-coefficient Picard step for div(rho Dphi) + 2 rho = 0
// ---------------------------------------------------------------------

struct StepDiagnostics {
  double update_norm = 0.0;      // scaled sup of the relaxed update
  double cutoff_fraction = 0.0;  // active clamps / band evaluation points
  double audit_fraction = 0.0;   // cells with a wrong-sign face coefficient
};

class EllipticSolver {
 public:
  EllipticSolver(const Geometry& g, const ShockCurve& sc,
                 const SolverConfig& cfg)
      : geom_(g),
        cfg_(cfg),
        mesh_(make_mesh(g, sc, cfg.n_s, cfg.n_t)),
        bg_(make_background(g)),
        bands_(make_bands(g, cfg)),
        scale_(g.gas.v_inf * g.eta_bar) {
    cfg_.validate();
    classify_top_faces();
  }

  const FbpMesh& mesh() const { return mesh_; }
  const Background& background() const { return bg_; }
  const SonicBands& bands() const { return bands_; }
  const Geometry& geometry() const { return geom_; }
  double scale() const { return scale_; }
  bool top_is_shock(int i) const { return top_is_shock_[i] != 0; }

  // Moves the free boundary; the mesh follows, the sparsity pattern and
  // the face classification (fixed by the geometry) do not.
  void set_shock(const ShockCurve& sc) {
    mesh_ = make_mesh(geom_, sc, cfg_.n_s, cfg_.n_t);
  }

  // Correction gradients in physical coordinates. The mapping has s_eta=0,
  // so D = grad(s) psi_s + grad(t) psi_t with grad(s) = (2/L, 0) and
  // grad(t) = (-t T'/T, 1/T).
  std::array<double, 2> metric_gradient(double s, double t, double psi_s,
                                        double psi_t) const {
    const double xi = mesh_.map.xi_of_s(s);
    const double T = mesh_.map.top(xi);
    const double Tp = mesh_.map.top_prime(xi);
    const double sx = 2.0 / mesh_.map.length();
    return {psi_s * sx - psi_t * t * Tp / T, psi_t / T};
  }

  double dpsi_ds_cell(const std::vector<double>& psi, int i, int j) const {
    const double ds = mesh_.ds();
    if (i == 0) return (psi[mesh_.cid(1, j)] - psi[mesh_.cid(0, j)]) / ds;
    if (i == mesh_.ns - 1) {
      return (psi[mesh_.cid(i, j)] - psi[mesh_.cid(i - 1, j)]) / ds;
    }
    return (psi[mesh_.cid(i + 1, j)] - psi[mesh_.cid(i - 1, j)]) /
           (2.0 * ds);
  }

  double dpsi_dt_cell(const std::vector<double>& psi, int i, int j) const {
    const double dt = mesh_.dt();
    if (j == 0) return (psi[mesh_.cid(i, 1)] - psi[mesh_.cid(i, 0)]) / dt;
    if (j == mesh_.nt - 1) {
      return (psi[mesh_.cid(i, j)] - psi[mesh_.cid(i, j - 1)]) / dt;
    }
    return (psi[mesh_.cid(i, j + 1)] - psi[mesh_.cid(i, j - 1)]) /
           (2.0 * dt);
  }

  // Reconstructed correction gradient at the east face i+1/2 of row j.
  std::array<double, 2> eface_gradient(const std::vector<double>& psi, int i,
                                       int j) const {
    const double s = -1.0 + (i + 1) * mesh_.ds();
    const double t = mesh_.t_center(j);
    const double psi_s = (psi[mesh_.cid(i + 1, j)] - psi[mesh_.cid(i, j)]) /
                         mesh_.ds();
    const double psi_t =
        0.5 * (dpsi_dt_cell(psi, i, j) + dpsi_dt_cell(psi, i + 1, j));
    return metric_gradient(s, t, psi_s, psi_t);
  }

  // Reconstructed correction gradient at the north face of cell (i, j).
  std::array<double, 2> nface_gradient(const std::vector<double>& psi, int i,
                                       int j) const {
    const double s = mesh_.s_center(i);
    const double t = (j + 1) * mesh_.dt();
    const double psi_t = (psi[mesh_.cid(i, j + 1)] - psi[mesh_.cid(i, j)]) /
                         mesh_.dt();
    const double psi_s =
        0.5 * (dpsi_ds_cell(psi, i, j) + dpsi_ds_cell(psi, i, j + 1));
    return metric_gradient(s, t, psi_s, psi_t);
  }

  // One-sided correction gradient at a Dirichlet top face (data psi = 0).
  std::array<double, 2> top_gradient(const std::vector<double>& psi,
                                     int i) const {
    const double s = mesh_.s_center(i);
    const double psi_t = (0.0 - psi[mesh_.cid(i, mesh_.nt - 1)]) /
                         (0.5 * mesh_.dt());
    return metric_gradient(s, 1.0, 0.0, psi_t);
  }

  std::array<double, 2> center_gradient(const std::vector<double>& psi,
                                        int i, int j) const {
    return metric_gradient(mesh_.s_center(i), mesh_.t_center(j),
                           dpsi_ds_cell(psi, i, j),
                           dpsi_dt_cell(psi, i, j));
  }

  // Frozen gas state at a point from a correction gradient and value; the
  // gradient returned is the (possibly clamped) full physical one.
  struct FaceGas {
    double rho = 1.0;
    double c2 = 1.0;
    std::array<double, 2> gphi{};
    bool in_band = false;
    bool clamped = false;
  };

  FaceGas gas_at(Point p, const std::array<double, 2>& grad_corr,
                 double psi_val, bool with_cutoff) const {
    const auto gb = bg_.grad(p);
    FaceGas f;
    f.gphi = {grad_corr[0] + gb[0], grad_corr[1] + gb[1]};
    if (with_cutoff) {
      const auto st = bands_.clamp(p, f.gphi);
      f.in_band = st.first;
      f.clamped = st.second;
    }
    const double phi = bg_.phi(p) + psi_val;
    const double s2 = f.gphi[0] * f.gphi[0] + f.gphi[1] * f.gphi[1];
    f.rho = density_from_pseudo_bernoulli(s2, phi, geom_.gas);
    f.c2 = sound_speed_sq_from_state(s2, phi, geom_.gas);
    return f;
  }

  double density_at(Point p, const std::array<double, 2>& grad_corr,
                    double psi_val, bool with_cutoff, bool* in_band = nullptr,
                    bool* active = nullptr) const {
    const FaceGas f = gas_at(p, grad_corr, psi_val, with_cutoff);
    if (in_band) *in_band = f.in_band;
    if (active) *active = f.clamped;
    return f.rho;
  }

  // Consistent outward mass flux rho Dphi . nL at a face midpoint.
  double full_flux(Point m, const std::array<double, 2>& grad_corr,
                   double psi_val, const std::array<double, 2>& nL,
                   bool with_cutoff) const {
    const auto gb = bg_.grad(m);
    std::array<double, 2> g = {grad_corr[0] + gb[0], grad_corr[1] + gb[1]};
    if (with_cutoff) bands_.clamp(m, g);
    const double phi = bg_.phi(m) + psi_val;
    const double rho = density_from_pseudo_bernoulli(
        g[0] * g[0] + g[1] * g[1], phi, geom_.gas);
    return rho * (g[0] * nL[0] + g[1] * nL[1]);
  }

  // Signed residual of the discrete equation at psi: flux sums with
  // consistent metric gradients plus the source, one entry per cell.
  std::vector<double> residual_vector(const std::vector<double>& psi,
                                      bool with_cutoff,
                                      int* band_pts = nullptr,
                                      int* band_active = nullptr) const {
    const int ns = mesh_.ns, nt = mesh_.nt;
    std::vector<double> res(static_cast<size_t>(ns) * nt, 0.0);
    int bp = 0, ba = 0;
    auto tally = [&](const FaceGas& f) {
      bp += f.in_band;
      ba += f.clamped;
    };

    for (int j = 0; j < nt; ++j) {
      for (int i = 0; i + 1 < ns; ++i) {
        const int kL = mesh_.cid(i, j), kR = mesh_.cid(i + 1, j);
        const Point A = mesh_.corner[mesh_.vid(i + 1, j)];
        const Point B = mesh_.corner[mesh_.vid(i + 1, j + 1)];
        const std::array<double, 2> nL = {B.eta - A.eta, -(B.xi - A.xi)};
        const Point m = {0.5 * (A.xi + B.xi), 0.5 * (A.eta + B.eta)};
        const FaceGas f = gas_at(m, eface_gradient(psi, i, j),
                                 0.5 * (psi[kL] + psi[kR]), with_cutoff);
        tally(f);
        const double flux = f.rho * (f.gphi[0] * nL[0] + f.gphi[1] * nL[1]);
        res[kL] += flux;
        res[kR] -= flux;
      }
    }
    for (int j = 0; j + 1 < nt; ++j) {
      for (int i = 0; i < ns; ++i) {
        const int kB = mesh_.cid(i, j), kT = mesh_.cid(i, j + 1);
        const Point A = mesh_.corner[mesh_.vid(i, j + 1)];
        const Point B = mesh_.corner[mesh_.vid(i + 1, j + 1)];
        const std::array<double, 2> nL = {-(B.eta - A.eta), B.xi - A.xi};
        const Point m = {0.5 * (A.xi + B.xi), 0.5 * (A.eta + B.eta)};
        const FaceGas f = gas_at(m, nface_gradient(psi, i, j),
                                 0.5 * (psi[kB] + psi[kT]), with_cutoff);
        tally(f);
        const double flux = f.rho * (f.gphi[0] * nL[0] + f.gphi[1] * nL[1]);
        res[kB] += flux;
        res[kT] -= flux;
      }
    }
    for (int i = 0; i < ns; ++i) {
      const int k = mesh_.cid(i, nt - 1);
      const Point A = mesh_.corner[mesh_.vid(i, nt)];
      const Point B = mesh_.corner[mesh_.vid(i + 1, nt)];
      const std::array<double, 2> nL = {-(B.eta - A.eta), B.xi - A.xi};
      const Point m = {0.5 * (A.xi + B.xi), 0.5 * (A.eta + B.eta)};
      if (top_is_shock_[i]) {
        const auto gi = geom_.state_inf.grad(m.xi, m.eta);
        res[k] += gi[0] * nL[0] + gi[1] * nL[1];
      } else {
        const FaceGas f =
            gas_at(m, top_gradient(psi, i), 0.0, with_cutoff);
        tally(f);
        res[k] += f.rho * (f.gphi[0] * nL[0] + f.gphi[1] * nL[1]);
      }
    }
    // Bottom faces carry zero mass flux (slip wall; the background flux
    // vanishes identically on eta = 0); west/east edges are collapsed.
    for (int j = 0; j < nt; ++j) {
      for (int i = 0; i < ns; ++i) {
        const int k = mesh_.cid(i, j);
        const FaceGas f = gas_at(mesh_.center[k],
                                 center_gradient(psi, i, j), psi[k],
                                 with_cutoff);
        tally(f);
        res[k] += 2.0 * f.rho * mesh_.area[k];
      }
    }
    if (band_pts) *band_pts = bp;
    if (band_active) *band_active = ba;
    return res;
  }

  // Jacobian of the discrete residual in the gradient arguments: the
  // density-linearized tensor rho (I - Dphi Dphi^T / c^2) evaluated at the
  // (clamped) frozen state, with the metric cross terms implicit.
  Eigen::SparseMatrix<double> assemble_jacobian(
      const std::vector<double>& psi, int* bad_rows_out = nullptr) const {
    const int ns = mesh_.ns, nt = mesh_.nt;
    const int n = ns * nt;
    const double ds = mesh_.ds(), dt = mesh_.dt();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(12) * n);
    std::vector<double> diag(n, 0.0);

    // Small linear-combination builder for a face flux in the unknowns.
    struct Stencil {
      int idx[12];
      double c[12];
      int n = 0;
      void add(int i, double v) {
        for (int k = 0; k < n; ++k) {
          if (idx[k] == i) {
            c[k] += v;
            return;
          }
        }
        idx[n] = i;
        c[n] = v;
        ++n;
      }
    };
    auto add_dt = [&](Stencil& st, int i, int j, double w) {
      if (j == 0) {
        st.add(mesh_.cid(i, 1), w / dt);
        st.add(mesh_.cid(i, 0), -w / dt);
      } else if (j == nt - 1) {
        st.add(mesh_.cid(i, j), w / dt);
        st.add(mesh_.cid(i, j - 1), -w / dt);
      } else {
        st.add(mesh_.cid(i, j + 1), w / (2.0 * dt));
        st.add(mesh_.cid(i, j - 1), -w / (2.0 * dt));
      }
    };
    auto add_ds = [&](Stencil& st, int i, int j, double w) {
      if (i == 0) {
        st.add(mesh_.cid(1, j), w / ds);
        st.add(mesh_.cid(0, j), -w / ds);
      } else if (i == ns - 1) {
        st.add(mesh_.cid(i, j), w / ds);
        st.add(mesh_.cid(i - 1, j), -w / ds);
      } else {
        st.add(mesh_.cid(i + 1, j), w / (2.0 * ds));
        st.add(mesh_.cid(i - 1, j), -w / (2.0 * ds));
      }
    };
    auto scatter = [&](const Stencil& st, int row, double sign) {
      for (int k = 0; k < st.n; ++k) {
        if (st.idx[k] == row) {
          diag[row] += sign * st.c[k];
        } else {
          trip.emplace_back(row, st.idx[k], sign * st.c[k]);
        }
      }
    };
    // Density-linearized co-normal: n~ = rho (nL - (Dphi.nL) Dphi / c^2).
    auto conormal = [&](const FaceGas& f, const std::array<double, 2>& nL) {
      const double gn = f.gphi[0] * nL[0] + f.gphi[1] * nL[1];
      return std::array<double, 2>{
          f.rho * (nL[0] - gn * f.gphi[0] / f.c2),
          f.rho * (nL[1] - gn * f.gphi[1] / f.c2)};
    };
    const double sx = 2.0 / mesh_.map.length();

    // East faces.
    for (int j = 0; j < nt; ++j) {
      for (int i = 0; i + 1 < ns; ++i) {
        const int kL = mesh_.cid(i, j), kR = mesh_.cid(i + 1, j);
        const Point A = mesh_.corner[mesh_.vid(i + 1, j)];
        const Point B = mesh_.corner[mesh_.vid(i + 1, j + 1)];
        const std::array<double, 2> nL = {B.eta - A.eta, -(B.xi - A.xi)};
        const Point m = {0.5 * (A.xi + B.xi), 0.5 * (A.eta + B.eta)};
        const FaceGas f = gas_at(m, eface_gradient(psi, i, j),
                                 0.5 * (psi[kL] + psi[kR]), true);
        const auto cn = conormal(f, nL);
        const double t_face = mesh_.t_center(j);
        const double xi_f = mesh_.map.xi_of_s(-1.0 + (i + 1) * ds);
        const double T = mesh_.map.top(xi_f);
        const double Tp = mesh_.map.top_prime(xi_f);
        const double gs_cn = sx * cn[0];
        const double gt_cn = (-t_face * Tp / T) * cn[0] + cn[1] / T;
        Stencil st;
        st.add(kR, gs_cn / ds);
        st.add(kL, -gs_cn / ds);
        add_dt(st, i, j, 0.5 * gt_cn);
        add_dt(st, i + 1, j, 0.5 * gt_cn);
        scatter(st, kL, +1.0);
        scatter(st, kR, -1.0);
      }
    }
    // North faces.
    for (int j = 0; j + 1 < nt; ++j) {
      for (int i = 0; i < ns; ++i) {
        const int kB = mesh_.cid(i, j), kT = mesh_.cid(i, j + 1);
        const Point A = mesh_.corner[mesh_.vid(i, j + 1)];
        const Point B = mesh_.corner[mesh_.vid(i + 1, j + 1)];
        const std::array<double, 2> nL = {-(B.eta - A.eta), B.xi - A.xi};
        const Point m = {0.5 * (A.xi + B.xi), 0.5 * (A.eta + B.eta)};
        const FaceGas f = gas_at(m, nface_gradient(psi, i, j),
                                 0.5 * (psi[kB] + psi[kT]), true);
        const auto cn = conormal(f, nL);
        const double t_face = (j + 1) * dt;
        const double xi_f = mesh_.map.xi_of_s(mesh_.s_center(i));
        const double T = mesh_.map.top(xi_f);
        const double Tp = mesh_.map.top_prime(xi_f);
        const double gs_cn = sx * cn[0];
        const double gt_cn = (-t_face * Tp / T) * cn[0] + cn[1] / T;
        Stencil st;
        st.add(kT, gt_cn / dt);
        st.add(kB, -gt_cn / dt);
        add_ds(st, i, j, 0.5 * gs_cn);
        add_ds(st, i, j + 1, 0.5 * gs_cn);
        scatter(st, kB, +1.0);
        scatter(st, kT, -1.0);
      }
    }
    // Top Dirichlet faces: one-sided implicit channel along grad t. The
    // anisotropy can shrink the co-normal component near the arcs, so the
    // coefficient is floored by a fraction of its isotropic value.
    for (int i = 0; i < ns; ++i) {
      if (top_is_shock_[i]) continue;
      const int k = mesh_.cid(i, nt - 1);
      const Point A = mesh_.corner[mesh_.vid(i, nt)];
      const Point B = mesh_.corner[mesh_.vid(i + 1, nt)];
      const std::array<double, 2> nL = {-(B.eta - A.eta), B.xi - A.xi};
      const Point m = {0.5 * (A.xi + B.xi), 0.5 * (A.eta + B.eta)};
      const FaceGas f = gas_at(m, top_gradient(psi, i), 0.0, true);
      const auto cn = conormal(f, nL);
      const double xi_f = mesh_.map.xi_of_s(mesh_.s_center(i));
      const double T = mesh_.map.top(xi_f);
      const double Tp = mesh_.map.top_prime(xi_f);
      const double gt_cn = (-Tp / T) * cn[0] + cn[1] / T;
      const double gt_nL = (-Tp / T) * nL[0] + nL[1] / T;
      if (!(gt_nL > 0.0)) {
        throw NumericalError("elliptic_step: degenerate top face metric at "
                             "column " + std::to_string(i));
      }
      const double D = std::max(gt_cn, 0.05 * f.rho * gt_nL) / (0.5 * dt);
      diag[k] -= D;
    }
    // Source response in the value argument: d(2 rho A)/d(psi_K).
    for (int j = 0; j < nt; ++j) {
      for (int i = 0; i < ns; ++i) {
        const int k = mesh_.cid(i, j);
        const FaceGas f = gas_at(mesh_.center[k],
                                 center_gradient(psi, i, j), psi[k], true);
        diag[k] -= 2.0 * f.rho / f.c2 * mesh_.area[k];
      }
    }

    for (int k = 0; k < n; ++k) trip.emplace_back(k, k, diag[k]);
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());

    // Maximum-principle audit: with the sign convention diag < 0, a
    // monotone operator has nonnegative off-diagonals. The stencil is
    // structurally symmetric, so the per-column scan (Eigen stores
    // column-major) counts the same coupling violations.
    if (bad_rows_out) {
      int bad_rows = 0;
      for (int col = 0; col < A.outerSize(); ++col) {
        bool bad = false;
        const double dref = std::abs(diag[col]);
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, col); it;
             ++it) {
          if (it.index() != col && it.value() < -1e-10 * dref) bad = true;
        }
        bad_rows += bad;
      }
      *bad_rows_out = bad_rows;
    }
    return A;
  }

  // One damped nonlinear solve in defect-correction form: assemble the
  // frozen density-linearized Jacobian, solve A d = -R(psi), and apply
  // psi += relax d. Fixed points are exactly discrete solutions.
  StepDiagnostics picard_step(std::vector<double>& psi) {
    const int n = mesh_.ns * mesh_.nt;
    int band_pts = 0, band_active = 0;
    const std::vector<double> res =
        residual_vector(psi, true, &band_pts, &band_active);
    int bad_rows = 0;
    Eigen::SparseMatrix<double> A = assemble_jacobian(psi, &bad_rows);

    if (!pattern_analyzed_) {
      lu_.analyzePattern(A);
      pattern_analyzed_ = true;
    }
    lu_.factorize(A);
    if (lu_.info() != Eigen::Success) {
      throw NumericalError("elliptic_step: sparse factorization failed on " +
                           std::to_string(mesh_.ns) + "x" +
                           std::to_string(mesh_.nt) + " grid");
    }
    Eigen::VectorXd rhs(n);
    for (int k = 0; k < n; ++k) rhs[k] = -res[k];
    const Eigen::VectorXd delta = lu_.solve(rhs);
    if (lu_.info() != Eigen::Success) {
      throw NumericalError("elliptic_step: back substitution failed");
    }

    StepDiagnostics diagn;
    for (int k = 0; k < n; ++k) {
      const double upd = cfg_.relax_field * delta[k];
      diagn.update_norm = std::max(diagn.update_norm, std::abs(upd));
      psi[k] += upd;
      if (!std::isfinite(psi[k])) {
        throw NumericalError("elliptic_step: field diverged at cell " +
                             std::to_string(k));
      }
    }
    diagn.update_norm /= scale_;
    diagn.cutoff_fraction =
        band_pts > 0 ? static_cast<double>(band_active) / band_pts : 0.0;
    diagn.audit_fraction = static_cast<double>(bad_rows) / n;
    last_cutoff_fraction_ = diagn.cutoff_fraction;
    return diagn;
  }

  // Sup-norm residual of the discrete equation at the current field,
  // scaled by the local source magnitude 2 rho_N A.
  double consistent_residual(const std::vector<double>& psi,
                             bool with_cutoff) const {
    const std::vector<double> res = residual_vector(psi, with_cutoff);
    double worst = 0.0;
    for (size_t k = 0; k < res.size(); ++k) {
      worst = std::max(worst, std::abs(res[k]) /
                                  (2.0 * geom_.state_N.rho * mesh_.area[k]));
    }
    return worst;
  }

  // Boundary trace along the shock image, for the free-boundary update and
  // the Rankine-Hugoniot diagnostics. Values are extrapolated to t = 1 by
  // the quadratic through the top three cell layers.
  struct ShockTrace {
    std::vector<double> xi;             // cell-center xi of shock fibers
    std::vector<double> level;          // phi_inf - phi at the boundary
    std::vector<double> deta;           // d_eta(phi_inf - phi)
    std::vector<double> flux_mismatch;  // rho Dphi.n - Dphi_inf.n, unit n
  };

  ShockTrace trace_shock(const std::vector<double>& psi) const {
    const int ns = mesh_.ns, nt = mesh_.nt;
    const double dt = mesh_.dt();
    std::vector<double> top_val(ns, 0.0), top_dt(ns, 0.0);
    for (int i = 0; i < ns; ++i) {
      const double p1 = psi[mesh_.cid(i, nt - 1)];
      const double p2 = psi[mesh_.cid(i, nt - 2)];
      const double p3 = psi[mesh_.cid(i, nt - 3)];
      // Quadratic in tau = (1 - t)/dt through tau = 0.5, 1.5, 2.5.
      const double c = 0.5 * (p1 - 2.0 * p2 + p3);
      const double b = -2.0 * p1 + 3.0 * p2 - p3;
      top_val[i] = p1 - 0.5 * b - 0.25 * c;
      top_dt[i] = -b / dt;
    }
    ShockTrace tr;
    for (int i = 0; i < ns; ++i) {
      if (!top_is_shock_[i]) continue;
      const double s = mesh_.s_center(i);
      const double xi = mesh_.map.xi_of_s(s);
      const double T = mesh_.map.top(xi);
      const Point X = {xi, T};
      const double phi_val = bg_.phi(X) + top_val[i];
      const double level = geom_.state_inf.phi(X.xi, X.eta) - phi_val;

      // psi_s along the boundary from neighbouring fiber traces (arc
      // fibers carry the exact value 0).
      double left = (i > 0) ? top_val[i - 1] : top_val[i];
      double right = (i + 1 < ns) ? top_val[i + 1] : top_val[i];
      double span = (i > 0 && i + 1 < ns) ? 2.0 * mesh_.ds() : mesh_.ds();
      const double psi_s = (right - left) / span;
      const auto grad_corr = metric_gradient(s, 1.0, psi_s, top_dt[i]);
      const auto gb = bg_.grad(X);
      const auto gi = geom_.state_inf.grad(X.xi, X.eta);
      const std::array<double, 2> gphi = {grad_corr[0] + gb[0],
                                          grad_corr[1] + gb[1]};
      // d/deta through the mapping touches only psi_t (s_eta = 0).
      const double deta = (gi[1] - gb[1]) - top_dt[i] / T;

      const double fp = mesh_.map.top_prime(xi);
      const double nn = std::hypot(fp, 1.0);
      const std::array<double, 2> nhat = {-fp / nn, 1.0 / nn};
      // The flux mismatch is a diagnostic; a cavitating transient must not
      // abort the run the Newton update could still rescue.
      double mism = std::numeric_limits<double>::infinity();
      try {
        const double rho = density_from_pseudo_bernoulli(
            gphi[0] * gphi[0] + gphi[1] * gphi[1], phi_val, geom_.gas);
        mism = rho * (gphi[0] * nhat[0] + gphi[1] * nhat[1]) -
               (gi[0] * nhat[0] + gi[1] * nhat[1]);
      } catch (const CavitationError&) {
      }
      tr.xi.push_back(xi);
      tr.level.push_back(level);
      tr.deta.push_back(deta);
      tr.flux_mismatch.push_back(mism);
    }
    return tr;
  }

  double last_cutoff_fraction() const { return last_cutoff_fraction_; }

 private:
  Geometry geom_;
  SolverConfig cfg_;
  FbpMesh mesh_;
  Background bg_;
  SonicBands bands_;
  double scale_;
  std::vector<char> top_is_shock_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  bool pattern_analyzed_ = false;
  double last_cutoff_fraction_ = 0.0;

  // A face is a shock face only when it lies entirely within the shock
  // span; straddling faces fall back to the arc Dirichlet condition (the
  // level set phi_inf - phi vanishes quadratically toward P1/P2, so the
  // misclassified sliver costs O(h^2)).
  void classify_top_faces() {
    top_is_shock_.assign(mesh_.ns, 0);
    for (int i = 0; i < mesh_.ns; ++i) {
      const double xi_l = mesh_.map.xi_of_s(-1.0 + i * mesh_.ds());
      const double xi_r = mesh_.map.xi_of_s(-1.0 + (i + 1) * mesh_.ds());
      top_is_shock_[i] =
          (xi_l >= geom_.xi_O() - 1e-12 && xi_r <= geom_.xi_N + 1e-12) ? 1
                                                                       : 0;
    }
  }
};

}  // namespace pmflow
