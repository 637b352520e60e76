#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <optional>

#include "lagwall/force.hpp"
#include "lagwall/integrator.hpp"
#include "lagwall/mass.hpp"

namespace lagwall {

template <int D>
struct ConservationReport {
  double kinetic = 0;          // 0.5 v.Mv v, full matrix (conserved part)
  double kinetic_penalty = 0;  // initial-boundary penalty share of kinetic
  double internal = 0;         // 1.Me e
  double total = 0;
  double mass = 0;
  Vec<D> momentum;  // volume-block momentum integral
};

template <int D>
inline ConservationReport<D> conservation_report(
    const Mesh<D>& mesh, const Spaces<D>& spaces, const QuadData<D>& qd,
    const KinematicMass<D>& mv, const ThermoMass<D>& me,
    const HydroState<D>& s) {
  ConservationReport<D> r;
  std::vector<double> tmp(s.v.size());
  mv.apply(s.v, tmp);
  r.kinetic = 0.5 * dot(std::span<const double>(s.v), tmp);

  // Penalty share, by direct quadrature of the frozen boundary term.
  int nkin = spaces.kin_per_elem();
  for (size_t wf = 0; wf < qd.wall.size(); ++wf) {
    auto en = mesh.elem_nodes(qd.wall[wf].elem);
    int f = qd.wall[wf].face;
    for (int q = 0; q < qd.nqf; ++q) {
      const auto& wp = qd.wall_pt[wf * qd.nqf + q];
      const double* w = &qd.face_kin_val[(size_t(f) * qd.nqf + q) * nkin];
      Vec<D> vq;
      for (int a = 0; a < nkin; ++a)
        for (int i = 0; i < D; ++i) vq[i] += w[a] * s.v[en[a] * D + i];
      double vn = dot(vq, wp.n0);
      r.kinetic_penalty += 0.5 * wp.alpha0 * qd.rho_max * qd.box_perimeter *
                           vn * vn * wp.surf0_w;
    }
  }

  std::vector<double> mee(s.e.size());
  me.apply(s.e, mee);
  for (double x : mee) r.internal += x;
  r.total = r.kinetic + r.internal;

  for (int el = 0; el < mesh.n_elems(); ++el) {
    auto en = mesh.elem_nodes(el);
    for (int q = 0; q < qd.nq; ++q) {
      double m = qd.rho0_detj0_w[size_t(el) * qd.nq + q];
      const double* w = &qd.kin_val[size_t(q) * nkin];
      Vec<D> vq;
      for (int a = 0; a < nkin; ++a)
        for (int i = 0; i < D; ++i) vq[i] += w[a] * s.v[en[a] * D + i];
      r.mass += m;
      for (int i = 0; i < D; ++i) r.momentum[i] += m * vq[i];
    }
  }
  return r;
}

// L2 norm of the wall-normal velocity over the current boundary:
// sqrt(integral of (v.n)^2 dGamma(t)). tag < 0 includes every wall face.
template <int D>
inline double boundary_violation(const Mesh<D>& mesh, const Spaces<D>& spaces,
                                 const QuadData<D>& qd,
                                 const HydroState<D>& s, int tag = -1) {
  int nkin = spaces.kin_per_elem();
  double acc = 0;
  for (size_t wf = 0; wf < qd.wall.size(); ++wf) {
    if (tag >= 0 && qd.wall[wf].tag != tag) continue;
    int el = qd.wall[wf].elem, f = qd.wall[wf].face;
    auto en = mesh.elem_nodes(el);
    auto dirs = face_tangent_dirs(0, f, std::integral_constant<int, D>{});
    for (int q = 0; q < qd.nqf; ++q) {
      const double* w = &qd.face_kin_val[(size_t(f) * qd.nqf + q) * nkin];
      const Vec<D>* g = &qd.face_kin_grad[(size_t(f) * qd.nqf + q) * nkin];
      Mat<D> J;
      Vec<D> vq;
      for (int a = 0; a < nkin; ++a)
        for (int i = 0; i < D; ++i) {
          vq[i] += w[a] * s.v[en[a] * D + i];
          for (int d = 0; d < D; ++d) J(i, d) += s.x[en[a] * D + i] * g[a][d];
        }
      Vec<D> n;
      double meas;
      if constexpr (D == 2) {
        Vec<2> t = J * dirs[0];
        meas = norm(t);
        n = normalized(Vec<2>{t[1], -t[0]});
      } else {
        Vec<3> t1 = J * dirs[0], t2 = J * dirs[1];
        Vec<3> c{t1[1] * t2[2] - t1[2] * t2[1], t1[2] * t2[0] - t1[0] * t2[2],
                 t1[0] * t2[1] - t1[1] * t2[0]};
        meas = norm(c);
        n = normalized(c);
      }
      double vn = dot(vq, n);
      acc += vn * vn * meas * qd.face_rule.weight[q];
    }
  }
  return std::sqrt(acc);
}

// Independent quadrature of the two wall distributions that drive the
// momentum balance: the normal traction integral of (n.sigma n) n and the
// velocity-penalty integral of beta rho c_s (v.n) n, both over the current
// boundary. Rebuilt from the state, not from force-evaluation caches; the
// per-step momentum change must equal dt * (traction - penalty).
template <int D>
struct WallIntegrals {
  Vec<D> traction;
  Vec<D> penalty;
};

template <int D>
inline WallIntegrals<D> wall_momentum_integrals(
    const Mesh<D>& mesh, const Spaces<D>& spaces, const QuadData<D>& qd,
    const ForceSettings<D>& fs, std::span<const double> x,
    std::span<const double> v, std::span<const double> e) {
  WallIntegrals<D> out;
  double beta = fs.beta >= 0.0 ? fs.beta : qd.beta;
  Lagrange1D geom{lobatto_points(mesh.geom_degree)};
  std::vector<Vec<D>> cur(mesh.n_nodes());
  for (int i = 0; i < mesh.n_nodes(); ++i)
    for (int d = 0; d < D; ++d) cur[i][d] = x[size_t(i) * D + d];
  for (size_t wf = 0; wf < qd.wall.size(); ++wf) {
    int el = qd.wall[wf].elem, f = qd.wall[wf].face;
    for (int q = 0; q < qd.nqf; ++q) {
      Vec<D> xi = face_ref_point<D>(f, qd.face_rule.point[q]);
      auto frame = face_frame(mesh, std::span<const Vec<D>>(cur), el, f,
                              qd.face_rule.point[q], geom);
      Mat<D> J = reference_jacobian(mesh, std::span<const Vec<D>>(cur), el,
                                    xi, geom);
      const auto& wp = qd.wall_pt[wf * qd.nqf + q];
      double rho = wp.rho0 * wp.jbox / det(J);
      double eq = interp_thermo(spaces, e, el, xi);
      double p = fs.gas.pressure(rho, eq);
      double cs = fs.gas.sound_speed(eq);
      // Reference-gradient gather for the one-sided velocity gradient.
      int nkin = spaces.kin_per_elem();
      std::vector<double> vals(nkin);
      std::vector<Vec<D>> grads(nkin);
      tensor_eval<D>(spaces.kin, xi, vals, grads);
      auto en = mesh.elem_nodes(el);
      Mat<D> Gv;
      Vec<D> vq;
      for (int a = 0; a < nkin; ++a)
        for (int i = 0; i < D; ++i) {
          vq[i] += vals[a] * v[en[a] * D + i];
          for (int d = 0; d < D; ++d) Gv(i, d) += v[en[a] * D + i] * grads[a][d];
        }
      Mat<D> grad_v = Gv * inverse(J);
      auto visc = artificial_viscosity(fs.visc, rho, cs, grad_v, qd.l0[el]);
      Mat<D> sig = visc.stress;
      for (int i = 0; i < D; ++i) sig(i, i) -= p;
      double nsn = dot(frame.normal, sig * frame.normal);
      double vn = dot(vq, frame.normal);
      double dw = frame.measure * qd.face_rule.weight[q];
      for (int i = 0; i < D; ++i) {
        out.traction[i] += nsn * frame.normal[i] * dw;
        out.penalty[i] += beta * rho * cs * vn * frame.normal[i] * dw;
      }
    }
  }
  return out;
}

// Shock-front locator for radial flows about the origin: samples the
// current density rho0 J0 / J along rays, takes the radius of the density
// maximum per ray, and reports the median over rays with a genuine
// interior maximum. Rays without one (uniform or pre-shock states) are
// dropped; if all drop, the result is flagged.
struct RayFan {
  double theta0 = 0;
  double theta1 = M_PI / 2;
  int n_rays = 16;
  int samples = 400;
  std::function<double(double)> r_max;  // domain extent per angle
};

struct ShockFront {
  double radius = 0;
  int valid_rays = 0;
  bool found = false;
};

template <int D>
inline ShockFront shock_front_radius(
    const Mesh<D>& mesh, const Spaces<D>& spaces, const HydroState<D>& s,
    const RayFan& fan,
    const std::function<double(const Vec<D>&)>& rho0 = {}) {
  static_assert(D == 2, "ray sampling is implemented for plane flows");
  auto density0 = rho0 ? rho0 : [](const Vec<D>&) { return 1.0; };
  Lagrange1D geom{lobatto_points(spaces.order)};
  std::vector<Vec<D>> cur(mesh.n_nodes());
  for (int i = 0; i < mesh.n_nodes(); ++i)
    for (int d = 0; d < D; ++d) cur[i][d] = s.x[size_t(i) * D + d];
  std::span<const Vec<D>> curs(cur), X0(mesh.node);

  // Current bounding boxes prune the element search.
  int npe = mesh.nodes_per_elem();
  std::vector<Vec<D>> lo(mesh.n_elems()), hi(mesh.n_elems());
  for (int el = 0; el < mesh.n_elems(); ++el) {
    auto en = mesh.elem_nodes(el);
    lo[el] = hi[el] = cur[en[0]];
    for (int a = 1; a < npe; ++a)
      for (int d = 0; d < D; ++d) {
        lo[el][d] = std::fmin(lo[el][d], cur[en[a]][d]);
        hi[el][d] = std::fmax(hi[el][d], cur[en[a]][d]);
      }
    for (int d = 0; d < D; ++d) {
      double pad = 1e-9 + 0.05 * (hi[el][d] - lo[el][d]);
      lo[el][d] -= pad;
      hi[el][d] += pad;
    }
  }
  auto sample_density = [&](const Vec<D>& p, double& out) {
    for (int el = 0; el < mesh.n_elems(); ++el) {
      bool in = true;
      for (int d = 0; d < D; ++d)
        in = in && p[d] >= lo[el][d] && p[d] <= hi[el][d];
      if (!in) continue;
      Vec<D> xi;
      if (!invert_map(mesh, curs, el, p, geom, xi)) continue;
      double j0 = det(reference_jacobian(mesh, X0, el, xi, geom));
      double j = det(reference_jacobian(mesh, curs, el, xi, geom));
      if (!(j > 0)) continue;
      out = density0(map_point(mesh, X0, el, xi, geom)) * j0 / j;
      return true;
    }
    return false;
  };

  std::vector<double> radii;
  for (int ray = 0; ray < fan.n_rays; ++ray) {
    double th = fan.theta0 +
                (ray + 0.5) * (fan.theta1 - fan.theta0) / fan.n_rays;
    double rmax = fan.r_max ? fan.r_max(th) : 1.0;
    Vec<D> dir{std::cos(th), std::sin(th)};
    double best_rho = -std::numeric_limits<double>::infinity();
    double lo_rho = std::numeric_limits<double>::infinity();
    int best_idx = -1, found = 0, last_idx = -1, first_idx = -1;
    for (int j = 0; j < fan.samples; ++j) {
      double rr = (j + 1) * rmax * (1.0 - 1e-9) / fan.samples;
      double rho;
      if (!sample_density(Vec<D>{rr * dir[0], rr * dir[1]}, rho)) continue;
      ++found;
      if (first_idx < 0) first_idx = j;
      last_idx = j;
      lo_rho = std::fmin(lo_rho, rho);
      if (rho > best_rho) {
        best_rho = rho;
        best_idx = j;
      }
    }
    bool interior = found >= 3 && best_idx > first_idx && best_idx < last_idx;
    bool contrast =
        best_rho - lo_rho > 1e-9 * std::fmax(1.0, std::abs(best_rho));
    if (interior && contrast)
      radii.push_back((best_idx + 1) * rmax * (1.0 - 1e-9) / fan.samples);
  }
  ShockFront sf;
  sf.valid_rays = static_cast<int>(radii.size());
  if (radii.empty()) return sf;
  std::sort(radii.begin(), radii.end());
  size_t n = radii.size();
  sf.radius = (n % 2) ? radii[n / 2]
                      : 0.5 * (radii[n / 2 - 1] + radii[n / 2]);
  sf.found = true;
  return sf;
}

}  // namespace lagwall
