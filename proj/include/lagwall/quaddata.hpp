#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "lagwall/mesh.hpp"
#include "lagwall/spaces.hpp"

namespace lagwall {

enum class CellKind { tensor, simplex };

// Degree-dependent constant of the polynomial trace inequality that sizes
// the wall penalties.
inline double penalty_constant(int order, int dim, CellKind kind) {
  if (kind == CellKind::tensor) return double(order + 1) * (order + 1);
  return double(order + 1) * (order + dim) / dim;
}

inline double penalty_beta(int order, int dim,
                           CellKind kind = CellKind::tensor) {
  return 20.0 * penalty_constant(order, dim, kind);
}

// Everything frozen on the initial configuration, evaluated once: geometric
// factors at volume and wall-face quadrature points, reference basis tables
// shared by all elements, and the penalty scalings. Time stepping never
// recomputes any of it, which is what keeps both mass matrices constant.
template <int D>
struct QuadData {
  // Reference rules and basis tables.
  TensorRule<D> vol_rule;
  std::vector<double> kin_val;   // [q * n_kin_loc + a]
  std::vector<Vec<D>> kin_grad;  // reference gradients, same layout
  std::vector<double> th_val;    // [q * n_th_loc + l]

  TensorRule<D - 1> face_rule;
  std::vector<double> face_kin_val;   // [(f * nqf + q) * n_kin_loc + a]
  std::vector<Vec<D>> face_kin_grad;  // volume reference gradients at face pts
  std::vector<double> face_th_val;

  // Frozen initial-configuration factors.
  std::vector<double> rho0_detj0_w;  // [elem * nq + q]
  std::vector<Mat<D>> j0_inv;        // [elem * nq + q]
  std::vector<double> l0;            // per element: V0^(1/D) / order

  struct WallFace {
    int elem = 0;
    int face = 0;
    int tag = 0;
  };
  struct WallPoint {
    Vec<D> n0;           // initial outward normal
    double surf0_w = 0;  // initial surface measure times face weight
    double jbox = 0;     // det of the volume Jacobian at the face point
    double alpha0 = 0;   // beta * L / jbox^(1/D)
    double rho0 = 0;     // initial density at the face point
    Mat<D> j0f_inv;      // inverse volume Jacobian at the face point
  };
  std::vector<WallFace> wall;
  std::vector<WallPoint> wall_pt;  // [wall_idx * nqf + q]

  double beta = 0;
  double rho_max = 0;
  double box_perimeter = 0;
  int nq = 0;   // volume points per element
  int nqf = 0;  // points per face

  int n_vol_pts() const { return static_cast<int>(rho0_detj0_w.size()); }
  int n_wall_pts() const { return static_cast<int>(wall_pt.size()); }
};

// quad_pts overrides the 1D point count (default order + 2). beta < 0
// selects the degree-based default.
template <int D>
inline QuadData<D> init_quad_data(
    const Mesh<D>& mesh, const Spaces<D>& spaces,
    const std::function<double(const Vec<D>&)>& rho0 = {},
    int quad_pts = 0, double beta = -1.0) {
  auto density = rho0 ? rho0 : [](const Vec<D>&) { return 1.0; };
  QuadData<D> qd;
  int k = spaces.order;
  int nq1 = quad_pts > 0 ? quad_pts : k + 2;
  qd.beta = beta >= 0.0 ? beta : penalty_beta(k, D);
  qd.box_perimeter = bounding_box_perimeter(mesh);

  int nkin = spaces.kin_per_elem(), nth = spaces.thermo_per_elem();
  qd.vol_rule = tensor_rule<D>(gauss_rule(nq1));
  qd.nq = qd.vol_rule.size();
  qd.kin_val.resize(static_cast<size_t>(qd.nq) * nkin);
  qd.kin_grad.resize(static_cast<size_t>(qd.nq) * nkin);
  qd.th_val.resize(static_cast<size_t>(qd.nq) * nth);
  for (int q = 0; q < qd.nq; ++q) {
    tensor_eval<D>(spaces.kin, qd.vol_rule.point[q],
                   std::span(qd.kin_val).subspan(size_t(q) * nkin, nkin),
                   std::span(qd.kin_grad).subspan(size_t(q) * nkin, nkin));
    tensor_eval<D>(spaces.thermo, qd.vol_rule.point[q],
                   std::span(qd.th_val).subspan(size_t(q) * nth, nth));
  }

  qd.face_rule = tensor_rule<D - 1>(gauss_rule(nq1));
  qd.nqf = qd.face_rule.size();
  int nfaces = faces_per_elem(D);
  qd.face_kin_val.resize(static_cast<size_t>(nfaces) * qd.nqf * nkin);
  qd.face_kin_grad.resize(static_cast<size_t>(nfaces) * qd.nqf * nkin);
  qd.face_th_val.resize(static_cast<size_t>(nfaces) * qd.nqf * nth);
  for (int f = 0; f < nfaces; ++f)
    for (int q = 0; q < qd.nqf; ++q) {
      Vec<D> xi = face_ref_point<D>(f, qd.face_rule.point[q]);
      size_t at = (static_cast<size_t>(f) * qd.nqf + q);
      tensor_eval<D>(spaces.kin, xi,
                     std::span(qd.face_kin_val).subspan(at * nkin, nkin),
                     std::span(qd.face_kin_grad).subspan(at * nkin, nkin));
      tensor_eval<D>(spaces.thermo, xi,
                     std::span(qd.face_th_val).subspan(at * nth, nth));
    }

  // Volume factors.
  int ne = mesh.n_elems();
  std::span<const Vec<D>> X0(mesh.node);
  qd.rho0_detj0_w.resize(static_cast<size_t>(ne) * qd.nq);
  qd.j0_inv.resize(static_cast<size_t>(ne) * qd.nq);
  qd.l0.resize(ne);
  qd.rho_max = 0;
  for (int e = 0; e < ne; ++e) {
    auto en = mesh.elem_nodes(e);
    double vol0 = 0;
    for (int q = 0; q < qd.nq; ++q) {
      Mat<D> j0;
      Vec<D> x0;
      for (int a = 0; a < nkin; ++a) {
        const Vec<D>& p = X0[en[a]];
        const Vec<D>& g = qd.kin_grad[size_t(q) * nkin + a];
        double val = qd.kin_val[size_t(q) * nkin + a];
        for (int i = 0; i < D; ++i) {
          x0[i] += val * p[i];
          for (int d = 0; d < D; ++d) j0(i, d) += p[i] * g[d];
        }
      }
      double dj = det(j0);
      if (!(dj > 0.0))
        throw std::invalid_argument("init_quad_data: inverted initial cell");
      double r0 = density(x0);
      if (!(r0 > 0.0))
        throw std::invalid_argument("init_quad_data: nonpositive density");
      size_t at = size_t(e) * qd.nq + q;
      qd.rho0_detj0_w[at] = r0 * dj * qd.vol_rule.weight[q];
      qd.j0_inv[at] = inverse(j0);
      vol0 += dj * qd.vol_rule.weight[q];
      qd.rho_max = std::fmax(qd.rho_max, r0);
    }
    qd.l0[e] = std::pow(vol0, 1.0 / D) / k;
  }

  // Wall-face factors on the initial boundary.
  Lagrange1D geom{lobatto_points(mesh.geom_degree)};
  for (const auto& bf : mesh.bdry) {
    if (!bf.wall) continue;
    qd.wall.push_back({bf.elem, bf.face, bf.tag});
    for (int q = 0; q < qd.nqf; ++q) {
      Vec<D> xi = face_ref_point<D>(bf.face, qd.face_rule.point[q]);
      Mat<D> j0 = reference_jacobian(mesh, X0, bf.elem, xi, geom);
      typename QuadData<D>::WallPoint wp;
      wp.jbox = det(j0);
      if (!(wp.jbox > 0.0))
        throw std::invalid_argument("init_quad_data: inverted boundary cell");
      wp.j0f_inv = inverse(j0);
      auto dirs = face_tangent_dirs(0, bf.face, std::integral_constant<int, D>{});
      if constexpr (D == 2) {
        Vec<2> t = j0 * dirs[0];
        wp.surf0_w = norm(t) * qd.face_rule.weight[q];
        wp.n0 = normalized(Vec<2>{t[1], -t[0]});
      } else {
        Vec<3> t1 = j0 * dirs[0], t2 = j0 * dirs[1];
        Vec<3> c{t1[1] * t2[2] - t1[2] * t2[1], t1[2] * t2[0] - t1[0] * t2[2],
                 t1[0] * t2[1] - t1[1] * t2[0]};
        wp.surf0_w = norm(c) * qd.face_rule.weight[q];
        wp.n0 = normalized(c);
      }
      wp.rho0 = density(map_point(mesh, X0, bf.elem, xi, geom));
      wp.alpha0 = qd.beta * qd.box_perimeter / std::pow(wp.jbox, 1.0 / D);
      qd.wall_pt.push_back(wp);
    }
  }
  return qd;
}

}  // namespace lagwall
