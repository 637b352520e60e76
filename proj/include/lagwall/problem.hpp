#pragma once

#include <cmath>
#include <cstdio>
#include <memory>
#include <string>

#include "config.hpp"
#include "diagnostics.hpp"
#include "force.hpp"
#include "integrator.hpp"
#include "mass.hpp"
#include "mesh.hpp"
#include "quaddata.hpp"
#include "sedov.hpp"
#include "spaces.hpp"

namespace lagwall {

// Blast-wave initial data: rho0 = 1, v = 0, and all internal energy
// deposited uniformly over the element whose thermodynamic dof lies
// nearest the origin, scaled so the discrete internal energy equals
// `energy` exactly. The cell-constant deposit (classic first-zone energy)
// converges weakly to the point source under refinement and is the only
// in-cell shape that keeps the host cell intact: a one-hot coefficient on
// the interior-node basis is sign-indefinite — its negative lobes zero
// the pressure over part of the cell and the cell buckles — and shapes
// peaked at the origin corner over-drive the cell-interior nodes until
// the far corner of the cell pinches into a sliver; either way the time
// step collapses by orders of magnitude. A constant exerts zero net force
// on interior nodes (the pressure integral against interior test
// gradients vanishes), so the cell expands from its boundary and stays
// shaped. Ties on the nearest dof pick the lowest element index and warn.
template <int D>
inline HydroState<D> init_sedov(const Mesh<D>& mesh, const Spaces<D>& spaces,
                                const ThermoMass<D>& me, double energy) {
  HydroState<D> s;
  s.t = 0.0;
  s.x.resize(size_t(mesh.n_nodes()) * D);
  for (int i = 0; i < mesh.n_nodes(); ++i)
    for (int d = 0; d < D; ++d) s.x[size_t(i) * D + d] = mesh.node[i][d];
  s.v.assign(s.x.size(), 0.0);
  s.e.assign(size_t(spaces.n_thermo(mesh)), 0.0);

  auto th_pts = gauss_points(spaces.order);
  int nth = spaces.thermo_per_elem();
  Lagrange1D geom{lobatto_points(mesh.geom_degree)};
  std::span<const Vec<D>> X0(mesh.node);
  int best_elem = -1;
  double best_d2 = 0.0;
  bool tie = false;
  for (int el = 0; el < mesh.n_elems(); ++el) {
    for (int l = 0; l < nth; ++l) {
      Vec<D> xi;
      int rem = l;
      for (int d = 0; d < D; ++d) {
        xi[d] = th_pts[rem % spaces.order];
        rem /= spaces.order;
      }
      Vec<D> p = map_point(mesh, X0, el, xi, geom);
      double d2 = dot(p, p);
      if (best_elem < 0 || d2 < best_d2) {
        best_d2 = d2;
        best_elem = el;
        tie = false;
      } else if (d2 == best_d2 && el != best_elem) {
        tie = true;
      }
    }
  }
  if (tie)
    std::fprintf(stderr,
                 "init_sedov: nearest-dof tie at r=%.3e, keeping element %d\n",
                 std::sqrt(best_d2), best_elem);

  // The constant is represented exactly by the nodal coefficients, so the
  // discrete energy integral is the element mass times the coefficient.
  double mass = 0.0;
  for (int l = 0; l < nth; ++l)
    for (int m = 0; m < me.block_size(); ++m) mass += me.entry(best_elem, m, l);
  for (int l = 0; l < nth; ++l)
    s.e[spaces.thermo_dof(best_elem, l)] = energy / mass;
  return s;
}

// Kinematic constraint mask for strong normal-velocity enforcement: every
// wall-face node gets its axis-aligned normal components pinned. Requires
// all wall normals to be axis-aligned and throws otherwise, since strong
// enforcement of a single component has no meaning on oblique or curved
// walls.
template <int D>
inline std::vector<unsigned char> strong_wall_mask(const Mesh<D>& mesh,
                                                   const QuadData<D>& qd) {
  for (const auto& wp : qd.wall_pt) {
    double amax = 0.0;
    for (int d = 0; d < D; ++d) amax = std::fmax(amax, std::abs(wp.n0[d]));
    if (amax < 1.0 - 1e-12)
      throw ConfigError(
          "strong_axis_aligned: mesh has non-axis-aligned wall normals");
  }
  std::vector<unsigned char> mask(size_t(mesh.n_nodes()) * D, 0);
  auto pts = lobatto_points(mesh.geom_degree);
  Lagrange1D geom{pts};
  int k = mesh.geom_degree;
  std::span<const Vec<D>> X0(mesh.node);
  static_assert(D == 2, "strong wall constraints are plane-flow only");
  for (const auto& bf : mesh.bdry) {
    if (!bf.wall) continue;
    auto en = mesh.elem_nodes(bf.elem);
    for (int j = 0; j <= k; ++j)
      for (int i = 0; i <= k; ++i) {
        bool on = (bf.face == 0 && j == 0) || (bf.face == 1 && i == k) ||
                  (bf.face == 2 && j == k) || (bf.face == 3 && i == 0);
        if (!on) continue;
        double s = 0.0;
        switch (bf.face) {
          case 0: s = pts[i]; break;
          case 1: s = pts[j]; break;
          case 2: s = 1.0 - pts[i]; break;
          default: s = 1.0 - pts[j]; break;
        }
        auto fr = face_frame(mesh, X0, bf.elem, bf.face, Vec<1>{s}, geom);
        int node = en[size_t(j) * (k + 1) + i];
        for (int d = 0; d < D; ++d)
          if (std::abs(fr.normal[d]) > 0.5) mask[size_t(node) * D + d] = 1;
      }
  }
  return mask;
}

namespace detail {

// Distance from the origin to a convex polygon's boundary along direction
// theta; the polygon is given counterclockwise and must contain the origin
// (interior or on the boundary).
inline double polygon_ray_rmax(const std::array<Vec<2>, 4>& c, double theta) {
  Vec<2> d{std::cos(theta), std::sin(theta)};
  double best = 0.0;
  for (int i = 0; i < 4; ++i) {
    Vec<2> a = c[i], b = c[(i + 1) % 4];
    Vec<2> e = b - a;
    double den = d[0] * e[1] - d[1] * e[0];
    if (std::abs(den) < 1e-15) continue;
    double t = (a[0] * e[1] - a[1] * e[0]) / den;        // along the ray
    double u = (a[0] * d[1] - a[1] * d[0]) / (-den);     // along the edge
    if (t > 1e-12 && u >= -1e-12 && u <= 1.0 + 1e-12) best = std::fmax(best, t);
  }
  return best;
}

}  // namespace detail

// Everything a run needs, built once from a validated RunConfig. The
// integrator holds references into this object, so it is pinned in memory
// (no copies or moves).
template <int D>
struct ProblemSetup {
  Mesh<D> mesh;
  Spaces<D> spaces;
  QuadData<D> qd;
  KinematicMass<D> mv;
  ThermoMass<D> me;
  ForceSettings<D> fs;
  TimeIntegrator<D> integrator;
  HydroState<D> state;
  StepControls controls;
  RayFan fan;
  SedovReference ref;
  std::string name;
  double deposit;  // domain share of the blast energy actually deposited

  ProblemSetup(Mesh<D> m, const RunConfig& cfg, double share)
      : mesh(std::move(m)),
        spaces(build_spaces(mesh, cfg.order)),
        qd(init_quad_data(mesh, spaces, {}, cfg.quad_points, cfg.beta)),
        mv(KinematicMass<D>::build(mesh, spaces, qd,
                                   /*with_penalty=*/cfg.wall_mode == "weak")),
        me(ThermoMass<D>::build(mesh, spaces, qd)),
        fs{IdealGas{cfg.gamma},
           ViscositySettings{cfg.viscosity, cfg.q1, cfg.q2},
           /*weak_walls=*/cfg.wall_mode == "weak", cfg.beta},
        integrator(mesh, spaces, qd, mv, me, fs),
        ref(cfg.gamma, D, 1.0, cfg.energy),
        name(cfg.problem),
        deposit(cfg.energy * share) {
    if (cfg.wall_mode == "strong_axis_aligned")
      mv.set_constraints(strong_wall_mask(mesh, qd));
    state = init_sedov(mesh, spaces, me, deposit);
    controls.cfl = cfg.cfl;
    controls.dt_init = cfg.dt_init;
    controls.dt_max = cfg.dt_max;
    controls.t_final = cfg.t_final;
    controls.growth = cfg.growth;
    controls.shrink = cfg.shrink;
    controls.max_rejects = cfg.max_rejects;
    controls.max_steps = cfg.max_steps;
  }
  ProblemSetup(const ProblemSetup&) = delete;
  ProblemSetup& operator=(const ProblemSetup&) = delete;
};

inline std::unique_ptr<ProblemSetup<2>> build_problem(const RunConfig& cfg) {
  validate_config(cfg);
  Mesh<2> mesh;
  RayFan fan;
  fan.n_rays = 16;
  fan.samples = 400;
  if (cfg.problem == "sedov_square") {
    mesh = make_cartesian(cfg.res, cfg.res, {0.0, 0.0}, {1.0, 1.0}, cfg.order);
    std::array<Vec<2>, 4> c = {Vec<2>{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    fan.theta0 = 0.0;
    fan.theta1 = M_PI / 2;
    fan.r_max = [c](double th) { return detail::polygon_ray_rmax(c, th); };
  } else if (cfg.problem == "sedov_trapezoid") {
    std::array<Vec<2>, 4> c;
    for (int i = 0; i < 4; ++i)
      c[i] = {cfg.corners[2 * i], cfg.corners[2 * i + 1]};
    mesh = make_trapezoid(cfg.res, cfg.res, c, cfg.order);
    Vec<2> e1 = c[1] - c[0], e3 = c[3] - c[0];
    fan.theta0 = std::atan2(e1[1], e1[0]);
    fan.theta1 = std::atan2(e3[1], e3[0]);
    fan.r_max = [c](double th) { return detail::polygon_ray_rmax(c, th); };
  } else if (cfg.problem == "sedov_disc") {
    mesh = make_disc(cfg.res, 4 * cfg.res, cfg.disc_radius, cfg.order);
    double R = cfg.disc_radius;
    fan.theta0 = 0.0;
    fan.theta1 = 2 * M_PI;
    fan.r_max = [R](double) { return R; };
  } else if (cfg.problem == "sedov_hole_circle" ||
             cfg.problem == "sedov_hole_square") {
    HoleParams hp;
    hp.shape = cfg.problem == "sedov_hole_circle" ? HoleShape::circle
                                                  : HoleShape::rotated_square;
    hp.radius = cfg.hole_radius;
    hp.angle = cfg.hole_angle;
    mesh = make_square_with_hole(hp, cfg.res, std::max(cfg.res / 2, 1),
                                 cfg.order);
    std::array<Vec<2>, 4> c = {Vec<2>{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    fan.theta0 = 0.0;
    fan.theta1 = M_PI / 2;
    fan.r_max = [c](double th) { return detail::polygon_ray_rmax(c, th); };
  } else {  // custom_mesh (validated upstream)
    mesh = read_mesh<2>(cfg.mesh_file);
    if (mesh.geom_degree != cfg.order)
      throw ConfigError("custom_mesh: geometry degree " +
                        std::to_string(mesh.geom_degree) +
                        " must match order " + std::to_string(cfg.order));
    Vec<2> lo = mesh.node[0], hi = mesh.node[0];
    for (const auto& p : mesh.node)
      for (int d = 0; d < 2; ++d) {
        lo[d] = std::fmin(lo[d], p[d]);
        hi[d] = std::fmax(hi[d], p[d]);
      }
    double r = 0.5 * std::hypot(hi[0] - lo[0], hi[1] - lo[1]);
    fan.theta0 = 0.0;
    fan.theta1 = 2 * M_PI;
    fan.r_max = [r](double) { return r; };
  }
  // `energy` names the full symmetric blast; the walls through the origin
  // act as symmetry planes, so the domain receives the wedge share. This
  // keeps the radius reference independent of how the wedge is cut (1/4
  // for the corner problems, the whole blast for the disc).
  double share = (fan.theta1 - fan.theta0) / (2 * M_PI);
  auto ps = std::make_unique<ProblemSetup<2>>(std::move(mesh), cfg, share);
  ps->fan = fan;
  return ps;
}

}  // namespace lagwall
