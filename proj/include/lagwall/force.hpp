#pragma once

#include <limits>
#include <vector>

#include "lagwall/physics.hpp"
#include "lagwall/quaddata.hpp"
#include "lagwall/threading.hpp"

namespace lagwall {

template <int D>
struct ForceSettings {
  IdealGas gas;
  ViscositySettings visc;
  // Wall treatment: weak walls integrate the normal-traction removal and the
  // velocity penalty over the current boundary; beta < 0 takes the value
  // frozen in QuadData, 0 disables the velocity penalty.
  bool weak_walls = true;
  double beta = -1.0;
};

// One force evaluation at a state (x, v, e). momentum_rhs already carries
// the sign of the momentum equation (velocity mass * dv/dt = momentum_rhs).
// The cached per-point stress factors make the energy-side application the
// exact transpose of the momentum side: both contract the same sJw and
// face_s values, so u . (F g) == g . (F^T u) up to rounding.
template <int D>
struct ForceResult {
  std::vector<double> momentum_rhs;

  bool tangled = false;
  double min_detj = std::numeric_limits<double>::infinity();
  // min over volume points of l / (c_s + mu/(rho l)); the dt estimate
  // multiplies this by the CFL factor.
  double dt_ratio_min = std::numeric_limits<double>::infinity();
  double max_char_speed = 0.0;
  double min_length = std::numeric_limits<double>::infinity();

  std::vector<Mat<D>> sJw;    // stress * detJ * w at volume points
  std::vector<Mat<D>> jinvT;  // inverse-transpose Jacobian at volume points
  std::vector<double> face_s;  // [-(n.sn) + beta rho c_s (v.n)] * dGamma * w
  std::vector<Vec<D>> face_n;  // current outward normal
};

template <int D>
class ForceEvaluator {
 public:
  explicit ForceEvaluator(ForceSettings<D> s = {}) : set_(s) {}

  const ForceSettings<D>& settings() const { return set_; }

  void evaluate(const Mesh<D>& mesh, const Spaces<D>& spaces,
                const QuadData<D>& qd, std::span<const double> x,
                std::span<const double> v, std::span<const double> e,
                ForceResult<D>& out) const {
    int nkin = spaces.kin_per_elem(), nth = spaces.thermo_per_elem();
    int ne = mesh.n_elems(), k = spaces.order;
    double beta = set_.beta >= 0.0 ? set_.beta : qd.beta;
    out.tangled = false;
    out.min_detj = std::numeric_limits<double>::infinity();
    out.dt_ratio_min = std::numeric_limits<double>::infinity();
    out.max_char_speed = 0.0;
    out.min_length = std::numeric_limits<double>::infinity();
    out.momentum_rhs.assign(x.size(), 0.0);
    out.sJw.assign(size_t(ne) * qd.nq, Mat<D>{});
    out.jinvT.assign(size_t(ne) * qd.nq, Mat<D>{});
    out.face_s.assign(qd.wall_pt.size(), 0.0);
    out.face_n.assign(qd.wall_pt.size(), Vec<D>{});

    struct Partial {
      std::vector<double> rhs;
      double min_detj = std::numeric_limits<double>::infinity();
      double ratio = std::numeric_limits<double>::infinity();
      double speed = 0, minlen = std::numeric_limits<double>::infinity();
      bool tangled = false;
    };
    std::vector<Partial> parts(std::max(thread_count(), 1));

    int nslots = parallel_ranges(ne, [&](int eb, int ee, int slot) {
      Partial& P = parts[slot];
      P.rhs.assign(x.size(), 0.0);
      std::vector<Vec<D>> xe(nkin), ve(nkin), gx(nkin);
      std::vector<double> ee_(nth);
      for (int el = eb; el < ee; ++el) {
        auto en = mesh.elem_nodes(el);
        for (int a = 0; a < nkin; ++a)
          for (int i = 0; i < D; ++i) {
            xe[a][i] = x[en[a] * D + i];
            ve[a][i] = v[en[a] * D + i];
          }
        for (int l = 0; l < nth; ++l) ee_[l] = e[spaces.thermo_dof(el, l)];
        for (int q = 0; q < qd.nq; ++q) {
          size_t at = size_t(el) * qd.nq + q;
          const Vec<D>* g = &qd.kin_grad[size_t(q) * nkin];
          Mat<D> J, Gv;
          for (int a = 0; a < nkin; ++a)
            for (int i = 0; i < D; ++i)
              for (int d = 0; d < D; ++d) {
                J(i, d) += xe[a][i] * g[a][d];
                Gv(i, d) += ve[a][i] * g[a][d];
              }
          double dj = det(J);
          P.min_detj = std::fmin(P.min_detj, dj);
          if (!(dj > 0.0)) {
            P.tangled = true;
            return;
          }
          Mat<D> Jinv = inverse(J);
          double m = qd.rho0_detj0_w[at];
          double rho = m / (dj * qd.vol_rule.weight[q]);
          double eq = 0;
          const double* phi = &qd.th_val[size_t(q) * nth];
          for (int l = 0; l < nth; ++l) eq += phi[l] * ee_[l];
          double p = set_.gas.pressure(rho, eq);
          double cs = set_.gas.sound_speed(eq);
          Mat<D> grad_v = Gv * Jinv;
          auto visc =
              artificial_viscosity(set_.visc, rho, cs, grad_v, qd.l0[el]);
          Mat<D> sig = visc.stress;
          for (int i = 0; i < D; ++i) sig(i, i) -= p;
          Mat<D> sjw = (dj * qd.vol_rule.weight[q]) * sig;
          out.sJw[at] = sjw;
          out.jinvT[at] = transposed(Jinv);
          for (int a = 0; a < nkin; ++a) {
            Vec<D> gxa = out.jinvT[at] * g[a];
            Vec<D> f = sjw * gxa;
            for (int i = 0; i < D; ++i) P.rhs[en[a] * D + i] -= f[i];
          }
          // dt control: directional length over total signal speed.
          double len = min_singular_value(J) / k;
          double denom = cs + (rho > 0 && len > 0 ? visc.mu / (rho * len) : 0);
          P.speed = std::fmax(P.speed, denom);
          P.minlen = std::fmin(P.minlen, len);
          if (denom > 0 && len > 0)
            P.ratio = std::fmin(P.ratio, len / denom);
        }
      }
    });
    for (int s = 0; s < nslots; ++s) {
      const Partial& P = parts[s];
      out.min_detj = std::fmin(out.min_detj, P.min_detj);
      out.dt_ratio_min = std::fmin(out.dt_ratio_min, P.ratio);
      out.max_char_speed = std::fmax(out.max_char_speed, P.speed);
      out.min_length = std::fmin(out.min_length, P.minlen);
      out.tangled = out.tangled || P.tangled;
      if (!P.rhs.empty()) axpy(1.0, P.rhs, out.momentum_rhs);
    }
    if (out.tangled) return;

    // Wall faces, serial (an element may own several wall faces).
    std::vector<Vec<D>> xe(nkin), ve(nkin);
    std::vector<double> ee_(nth);
    for (size_t wf = 0; wf < qd.wall.size(); ++wf) {
      int el = qd.wall[wf].elem, f = qd.wall[wf].face;
      auto en = mesh.elem_nodes(el);
      for (int a = 0; a < nkin; ++a)
        for (int i = 0; i < D; ++i) {
          xe[a][i] = x[en[a] * D + i];
          ve[a][i] = v[en[a] * D + i];
        }
      for (int l = 0; l < nth; ++l) ee_[l] = e[spaces.thermo_dof(el, l)];
      auto dirs = face_tangent_dirs(0, f, std::integral_constant<int, D>{});
      for (int q = 0; q < qd.nqf; ++q) {
        size_t tat = (size_t(f) * qd.nqf + q);
        const double* w = &qd.face_kin_val[tat * nkin];
        const Vec<D>* g = &qd.face_kin_grad[tat * nkin];
        const double* phi = &qd.face_th_val[tat * nth];
        const auto& wp = qd.wall_pt[wf * qd.nqf + q];
        Mat<D> J, Gv;
        Vec<D> vq;
        for (int a = 0; a < nkin; ++a)
          for (int i = 0; i < D; ++i) {
            vq[i] += w[a] * ve[a][i];
            for (int d = 0; d < D; ++d) {
              J(i, d) += xe[a][i] * g[a][d];
              Gv(i, d) += ve[a][i] * g[a][d];
            }
          }
        double dj = det(J);
        out.min_detj = std::fmin(out.min_detj, dj);
        if (!(dj > 0.0)) {
          out.tangled = true;
          return;
        }
        Vec<D> n;
        double meas;
        if constexpr (D == 2) {
          Vec<2> t = J * dirs[0];
          meas = norm(t);
          n = normalized(Vec<2>{t[1], -t[0]});
        } else {
          Vec<3> t1 = J * dirs[0], t2 = J * dirs[1];
          Vec<3> c{t1[1] * t2[2] - t1[2] * t2[1],
                   t1[2] * t2[0] - t1[0] * t2[2],
                   t1[0] * t2[1] - t1[1] * t2[0]};
          meas = norm(c);
          n = normalized(c);
        }
        double rho = wp.rho0 * wp.jbox / dj;
        double eq = 0;
        for (int l = 0; l < nth; ++l) eq += phi[l] * ee_[l];
        double p = set_.gas.pressure(rho, eq);
        double cs = set_.gas.sound_speed(eq);
        Mat<D> grad_v = Gv * inverse(J);
        auto visc =
            artificial_viscosity(set_.visc, rho, cs, grad_v, qd.l0[el]);
        Mat<D> sig = visc.stress;
        for (int i = 0; i < D; ++i) sig(i, i) -= p;
        double nsn = dot(n, sig * n);
        double vn = dot(vq, n);
        double s = (-nsn + beta * rho * cs * vn) * meas *
                   qd.face_rule.weight[q];
        out.face_s[wf * qd.nqf + q] = s;
        out.face_n[wf * qd.nqf + q] = n;
        if (set_.weak_walls)
          for (int a = 0; a < nkin; ++a) {
            if (w[a] == 0.0) continue;
            for (int i = 0; i < D; ++i)
              out.momentum_rhs[en[a] * D + i] -= s * n[i] * w[a];
          }
      }
    }
  }

  // F^T u (energy-side application) against the cached factors.
  void energy_rhs(const Mesh<D>& mesh, const Spaces<D>& spaces,
                  const QuadData<D>& qd, const ForceResult<D>& fr,
                  std::span<const double> u, std::vector<double>& out) const {
    int nkin = spaces.kin_per_elem(), nth = spaces.thermo_per_elem();
    int ne = mesh.n_elems();
    out.assign(spaces.n_thermo(mesh), 0.0);
    parallel_ranges(ne, [&](int eb, int ee, int) {
      std::vector<Vec<D>> ue(nkin);
      for (int el = eb; el < ee; ++el) {
        auto en = mesh.elem_nodes(el);
        for (int a = 0; a < nkin; ++a)
          for (int i = 0; i < D; ++i) ue[a][i] = u[en[a] * D + i];
        for (int q = 0; q < qd.nq; ++q) {
          size_t at = size_t(el) * qd.nq + q;
          const Vec<D>* g = &qd.kin_grad[size_t(q) * nkin];
          Mat<D> grad_u;
          for (int a = 0; a < nkin; ++a) {
            Vec<D> gxa = fr.jinvT[at] * g[a];
            for (int i = 0; i < D; ++i)
              for (int kk = 0; kk < D; ++kk)
                grad_u(i, kk) += ue[a][i] * gxa[kk];
          }
          double val = ddot(fr.sJw[at], grad_u);
          const double* phi = &qd.th_val[size_t(q) * nth];
          for (int l = 0; l < nth; ++l)
            out[spaces.thermo_dof(el, l)] += val * phi[l];
        }
      }
    });
    if (!set_.weak_walls) return;
    for (size_t wf = 0; wf < qd.wall.size(); ++wf) {
      int el = qd.wall[wf].elem, f = qd.wall[wf].face;
      auto en = mesh.elem_nodes(el);
      for (int q = 0; q < qd.nqf; ++q) {
        size_t tat = (size_t(f) * qd.nqf + q);
        const double* w = &qd.face_kin_val[tat * nkin];
        const double* phi = &qd.face_th_val[tat * nth];
        const Vec<D>& n = fr.face_n[wf * qd.nqf + q];
        Vec<D> uq;
        for (int a = 0; a < nkin; ++a)
          for (int i = 0; i < D; ++i) uq[i] += w[a] * u[en[a] * D + i];
        double s = fr.face_s[wf * qd.nqf + q] * dot(uq, n);
        for (int l = 0; l < nth; ++l)
          out[spaces.thermo_dof(el, l)] += s * phi[l];
      }
    }
  }

  // F g (momentum-side application to a thermodynamic vector); the g = 1
  // case reproduces -momentum_rhs. Verification path.
  void apply(const Mesh<D>& mesh, const Spaces<D>& spaces,
             const QuadData<D>& qd, const ForceResult<D>& fr,
             std::span<const double> gvec, std::vector<double>& out) const {
    int nkin = spaces.kin_per_elem(), nth = spaces.thermo_per_elem();
    out.assign(size_t(spaces.n_kin(mesh)) * D, 0.0);
    for (int el = 0; el < mesh.n_elems(); ++el) {
      auto en = mesh.elem_nodes(el);
      for (int q = 0; q < qd.nq; ++q) {
        size_t at = size_t(el) * qd.nq + q;
        const double* phi = &qd.th_val[size_t(q) * nth];
        const Vec<D>* g = &qd.kin_grad[size_t(q) * nkin];
        double gq = 0;
        for (int l = 0; l < nth; ++l)
          gq += phi[l] * gvec[spaces.thermo_dof(el, l)];
        for (int a = 0; a < nkin; ++a) {
          Vec<D> f = fr.sJw[at] * (fr.jinvT[at] * g[a]);
          for (int i = 0; i < D; ++i) out[en[a] * D + i] += gq * f[i];
        }
      }
    }
    if (!set_.weak_walls) return;
    for (size_t wf = 0; wf < qd.wall.size(); ++wf) {
      int el = qd.wall[wf].elem, f = qd.wall[wf].face;
      auto en = mesh.elem_nodes(el);
      for (int q = 0; q < qd.nqf; ++q) {
        size_t tat = (size_t(f) * qd.nqf + q);
        const double* w = &qd.face_kin_val[tat * nkin];
        const double* phi = &qd.face_th_val[tat * nth];
        const Vec<D>& n = fr.face_n[wf * qd.nqf + q];
        double gq = 0;
        for (int l = 0; l < nth; ++l)
          gq += phi[l] * gvec[spaces.thermo_dof(el, l)];
        double s = fr.face_s[wf * qd.nqf + q] * gq;
        for (int a = 0; a < nkin; ++a)
          for (int i = 0; i < D; ++i)
            out[en[a] * D + i] += s * n[i] * w[a];
      }
    }
  }

  // Tangling scan used by post-step validation: smallest det J over all
  // volume and wall-face points of a candidate geometry.
  double min_detj(const Mesh<D>& mesh, const Spaces<D>& spaces,
                  const QuadData<D>& qd, std::span<const double> x) const {
    int nkin = spaces.kin_per_elem();
    int ne = mesh.n_elems();
    std::vector<double> mins(std::max(thread_count(), 1),
                             std::numeric_limits<double>::infinity());
    int nslots = parallel_ranges(ne, [&](int eb, int ee, int slot) {
      std::vector<Vec<D>> xe(nkin);
      for (int el = eb; el < ee; ++el) {
        auto en = mesh.elem_nodes(el);
        for (int a = 0; a < nkin; ++a)
          for (int i = 0; i < D; ++i) xe[a][i] = x[en[a] * D + i];
        for (int q = 0; q < qd.nq; ++q) {
          const Vec<D>* g = &qd.kin_grad[size_t(q) * nkin];
          Mat<D> J;
          for (int a = 0; a < nkin; ++a)
            for (int i = 0; i < D; ++i)
              for (int d = 0; d < D; ++d) J(i, d) += xe[a][i] * g[a][d];
          mins[slot] = std::fmin(mins[slot], det(J));
        }
      }
    });
    double res = std::numeric_limits<double>::infinity();
    for (int s = 0; s < nslots; ++s) res = std::fmin(res, mins[s]);
    std::vector<Vec<D>> xe(nkin);
    for (size_t wf = 0; wf < qd.wall.size(); ++wf) {
      int el = qd.wall[wf].elem, f = qd.wall[wf].face;
      auto en = mesh.elem_nodes(el);
      for (int a = 0; a < nkin; ++a)
        for (int i = 0; i < D; ++i) xe[a][i] = x[en[a] * D + i];
      for (int q = 0; q < qd.nqf; ++q) {
        const Vec<D>* g = &qd.face_kin_grad[(size_t(f) * qd.nqf + q) * nkin];
        Mat<D> J;
        for (int a = 0; a < nkin; ++a)
          for (int i = 0; i < D; ++i)
            for (int d = 0; d < D; ++d) J(i, d) += xe[a][i] * g[a][d];
        res = std::fmin(res, det(J));
      }
    }
    return res;
  }

 private:
  ForceSettings<D> set_;
};

}  // namespace lagwall
