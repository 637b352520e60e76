#pragma once

#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "lagwall/quaddata.hpp"

namespace lagwall {

struct Csr {
  int n = 0;
  std::vector<int> rowptr, col;
  std::vector<double> val;

  void mult(std::span<const double> x, std::span<double> y) const {
    for (int i = 0; i < n; ++i) {
      double s = 0;
      for (int k = rowptr[i]; k < rowptr[i + 1]; ++k) s += val[k] * x[col[k]];
      y[i] = s;
    }
  }
  double entry(int i, int j) const {
    for (int k = rowptr[i]; k < rowptr[i + 1]; ++k)
      if (col[k] == j) return val[k];
    return 0.0;
  }
};

struct CgReport {
  int iterations = 0;
  double rel_residual = 0;
  bool converged = false;
};

// Kinematic (velocity) mass matrix: block-diagonal in components from the
// moving-domain volume term, written against frozen initial-configuration
// factors, plus the initial-boundary penalty block that couples components
// through n0 x n0. Constant in time by construction. Solved by
// Jacobi-preconditioned CG; an optional constraint mask turns rows/columns
// into identity for strong axis-aligned walls.
template <int D>
class KinematicMass {
 public:
  static KinematicMass build(const Mesh<D>& mesh, const Spaces<D>& spaces,
                             const QuadData<D>& qd, bool with_penalty = true) {
    KinematicMass mm;
    int nk = spaces.n_kin(mesh);
    mm.csr_.n = nk * D;
    std::vector<std::map<int, double>> rows(mm.csr_.n);
    int nkin = spaces.kin_per_elem();
    for (int e = 0; e < mesh.n_elems(); ++e) {
      auto en = mesh.elem_nodes(e);
      for (int q = 0; q < qd.nq; ++q) {
        double m = qd.rho0_detj0_w[size_t(e) * qd.nq + q];
        const double* w = &qd.kin_val[size_t(q) * nkin];
        for (int a = 0; a < nkin; ++a) {
          double ma = m * w[a];
          for (int b = 0; b < nkin; ++b) {
            double v = ma * w[b];
            for (int i = 0; i < D; ++i)
              rows[en[a] * D + i][en[b] * D + i] += v;
          }
        }
      }
    }
    if (with_penalty) {
      for (size_t wf = 0; wf < qd.wall.size(); ++wf) {
        auto en = mesh.elem_nodes(qd.wall[wf].elem);
        int f = qd.wall[wf].face;
        for (int q = 0; q < qd.nqf; ++q) {
          const auto& wp = qd.wall_pt[wf * qd.nqf + q];
          double c = wp.alpha0 * qd.rho_max * qd.box_perimeter * wp.surf0_w;
          const double* w =
              &qd.face_kin_val[(size_t(f) * qd.nqf + q) * nkin];
          for (int a = 0; a < nkin; ++a) {
            if (w[a] == 0.0) continue;
            for (int b = 0; b < nkin; ++b) {
              if (w[b] == 0.0) continue;
              double v = c * w[a] * w[b];
              for (int i = 0; i < D; ++i)
                for (int j = 0; j < D; ++j)
                  rows[en[a] * D + i][en[b] * D + j] +=
                      v * wp.n0[i] * wp.n0[j];
            }
          }
        }
      }
    }
    mm.csr_.rowptr.resize(mm.csr_.n + 1, 0);
    for (int i = 0; i < mm.csr_.n; ++i)
      mm.csr_.rowptr[i + 1] = mm.csr_.rowptr[i] + int(rows[i].size());
    mm.csr_.col.reserve(mm.csr_.rowptr.back());
    mm.csr_.val.reserve(mm.csr_.rowptr.back());
    for (auto& r : rows)
      for (auto& [j, v] : r) {
        mm.csr_.col.push_back(j);
        mm.csr_.val.push_back(v);
      }
    mm.diag_.resize(mm.csr_.n);
    for (int i = 0; i < mm.csr_.n; ++i) {
      double d = mm.csr_.entry(i, i);
      if (!(d > 0.0))
        throw std::runtime_error("KinematicMass: nonpositive diagonal");
      mm.diag_[i] = d;
    }
    return mm;
  }

  int size() const { return csr_.n; }
  const Csr& matrix() const { return csr_; }

  void set_constraints(std::vector<unsigned char> mask) {
    if (!mask.empty() && int(mask.size()) != csr_.n)
      throw std::invalid_argument("KinematicMass: bad constraint mask");
    mask_ = std::move(mask);
  }
  const std::vector<unsigned char>& constraints() const { return mask_; }

  void apply(std::span<const double> x, std::span<double> y) const {
    csr_.mult(x, y);
  }

  // Constrained operator: identity on masked dofs, P M P elsewhere.
  void apply_constrained(std::span<const double> x, std::span<double> y,
                         std::vector<double>& scratch) const {
    if (mask_.empty()) {
      csr_.mult(x, y);
      return;
    }
    scratch.assign(x.begin(), x.end());
    for (int i = 0; i < csr_.n; ++i)
      if (mask_[i]) scratch[i] = 0.0;
    csr_.mult(scratch, y);
    for (int i = 0; i < csr_.n; ++i) y[i] = mask_[i] ? x[i] : y[i];
  }

  // CG with warm start; x holds the initial guess on entry and the solution
  // on exit. Tolerance is relative to |rhs|.
  CgReport solve(std::span<const double> rhs, std::vector<double>& x,
                 double tol = 1e-12, int max_iter = 1000) const {
    int n = csr_.n;
    x.resize(n, 0.0);
    std::vector<double> b(rhs.begin(), rhs.end());
    if (!mask_.empty())
      for (int i = 0; i < n; ++i)
        if (mask_[i]) b[i] = 0.0;
    double bnorm = std::sqrt(dot(b, b));
    CgReport rep;
    if (bnorm == 0.0) {
      std::fill(x.begin(), x.end(), 0.0);
      rep.converged = true;
      return rep;
    }
    std::vector<double> r(n), z(n), p(n), ap(n), scratch;
    if (!mask_.empty())
      for (int i = 0; i < n; ++i)
        if (mask_[i]) x[i] = 0.0;
    apply_constrained(x, r, scratch);
    for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
    auto precond = [&](const std::vector<double>& in, std::vector<double>& out) {
      for (int i = 0; i < n; ++i)
        out[i] = (!mask_.empty() && mask_[i]) ? in[i] : in[i] / diag_[i];
    };
    precond(r, z);
    p = z;
    double rz = dot(r, z);
    for (int it = 0; it < max_iter; ++it) {
      double rn = std::sqrt(dot(r, r));
      rep.rel_residual = rn / bnorm;
      if (rep.rel_residual <= tol) {
        // Guard against recurrence drift with one true-residual check.
        apply_constrained(x, ap, scratch);
        double tr = 0;
        for (int i = 0; i < n; ++i) {
          double d = b[i] - ap[i];
          tr += d * d;
        }
        rep.rel_residual = std::sqrt(tr) / bnorm;
        if (rep.rel_residual <= 4.0 * tol) {
          rep.converged = true;
          rep.iterations = it;
          return rep;
        }
        for (int i = 0; i < n; ++i) r[i] = b[i] - ap[i];
        precond(r, z);
        p = z;
        rz = dot(r, z);
      }
      apply_constrained(p, ap, scratch);
      double pap = dot(p, ap);
      if (!(pap > 0.0))
        throw std::runtime_error("KinematicMass: CG breakdown");
      double alpha = rz / pap;
      axpy(alpha, p, x);
      axpy(-alpha, ap, r);
      precond(r, z);
      double rz2 = dot(r, z);
      double beta = rz2 / rz;
      rz = rz2;
      for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
      rep.iterations = it + 1;
    }
    throw std::runtime_error("KinematicMass: CG failed to converge");
  }

 private:
  Csr csr_;
  std::vector<double> diag_;
  std::vector<unsigned char> mask_;
};

// Thermodynamic (energy) mass matrix: independent dense SPD blocks per
// element, factored once. Also constant in time.
template <int D>
class ThermoMass {
 public:
  static ThermoMass build(const Mesh<D>& mesh, const Spaces<D>& spaces,
                          const QuadData<D>& qd) {
    ThermoMass tm;
    tm.nb_ = spaces.thermo_per_elem();
    int ne = mesh.n_elems(), nb = tm.nb_;
    tm.block_.assign(size_t(ne) * nb * nb, 0.0);
    for (int e = 0; e < ne; ++e) {
      double* M = &tm.block_[size_t(e) * nb * nb];
      for (int q = 0; q < qd.nq; ++q) {
        double m = qd.rho0_detj0_w[size_t(e) * qd.nq + q];
        const double* phi = &qd.th_val[size_t(q) * nb];
        for (int l = 0; l < nb; ++l)
          for (int mcol = 0; mcol < nb; ++mcol)
            M[l * nb + mcol] += m * phi[l] * phi[mcol];
      }
    }
    tm.chol_ = tm.block_;
    for (int e = 0; e < ne; ++e) tm.factor(&tm.chol_[size_t(e) * nb * nb]);
    tm.row_sum_.assign(size_t(ne) * nb, 0.0);
    for (int e = 0; e < ne; ++e)
      for (int l = 0; l < nb; ++l) {
        double s = 0;
        for (int mcol = 0; mcol < nb; ++mcol)
          s += tm.block_[size_t(e) * nb * nb + l * nb + mcol];
        tm.row_sum_[size_t(e) * nb + l] = s;
      }
    return tm;
  }

  int block_size() const { return nb_; }
  int n_elems() const { return int(block_.size() / (size_t(nb_) * nb_)); }
  int size() const { return n_elems() * nb_; }

  double entry(int elem, int l, int m) const {
    return block_[size_t(elem) * nb_ * nb_ + l * nb_ + m];
  }
  // sum_m M[l,m] of one element block; equals the integral of rho phi_l.
  double row_sum(int elem, int l) const {
    return row_sum_[size_t(elem) * nb_ + l];
  }

  void apply(std::span<const double> e, std::span<double> out) const {
    int nb = nb_;
    for (int el = 0; el < n_elems(); ++el) {
      const double* M = &block_[size_t(el) * nb * nb];
      for (int l = 0; l < nb; ++l) {
        double s = 0;
        for (int m = 0; m < nb; ++m) s += M[l * nb + m] * e[el * nb + m];
        out[el * nb + l] = s;
      }
    }
  }

  void solve(std::span<const double> rhs, std::span<double> out) const {
    int nb = nb_;
    for (int el = 0; el < n_elems(); ++el) {
      const double* L = &chol_[size_t(el) * nb * nb];
      double* y = &out[size_t(el) * nb];
      for (int i = 0; i < nb; ++i) {
        double s = rhs[el * nb + i];
        for (int j = 0; j < i; ++j) s -= L[i * nb + j] * y[j];
        y[i] = s / L[i * nb + i];
      }
      for (int i = nb - 1; i >= 0; --i) {
        double s = y[i];
        for (int j = i + 1; j < nb; ++j) s -= L[j * nb + i] * y[j];
        y[i] = s / L[i * nb + i];
      }
    }
  }

 private:
  void factor(double* A) const {
    int nb = nb_;
    for (int i = 0; i < nb; ++i) {
      for (int j = 0; j <= i; ++j) {
        double s = A[i * nb + j];
        for (int k = 0; k < j; ++k) s -= A[i * nb + k] * A[j * nb + k];
        if (i == j) {
          if (!(s > 0.0))
            throw std::runtime_error("ThermoMass: block not positive");
          A[i * nb + i] = std::sqrt(s);
        } else {
          A[i * nb + j] = s / A[j * nb + j];
        }
      }
      for (int j = i + 1; j < nb; ++j) A[i * nb + j] = 0.0;
    }
  }

  int nb_ = 0;
  std::vector<double> block_, chol_, row_sum_;
};

}  // namespace lagwall
