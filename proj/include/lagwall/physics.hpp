#pragma once

#include <cmath>

#include "lagwall/algebra.hpp"

namespace lagwall {

// Ideal gas in specific-internal-energy form. Negative energies (transient
// undershoots near strong fronts) are clamped to zero inside the pointwise
// evaluations only; stored coefficients are left untouched.
struct IdealGas {
  double gamma = 1.4;

  double pressure(double rho, double e) const {
    return (gamma - 1.0) * rho * std::fmax(e, 0.0);
  }
  double sound_speed(double e) const {
    return std::sqrt(gamma * (gamma - 1.0) * std::fmax(e, 0.0));
  }
};

struct ViscositySettings {
  bool enabled = true;
  double q1 = 0.5;  // linear coefficient
  double q2 = 2.0;  // quadratic coefficient
};

template <int D>
inline Mat<D> sym_velocity_gradient(const Mat<D>& grad_v) {
  Mat<D> e;
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j)
      e(i, j) = 0.5 * (grad_v(i, j) + grad_v(j, i));
  return e;
}

// Fraction of the motion that is compressive: |div v| / ||grad v||_F,
// clamped to [0,1]. Zero for rigid motion and pure shear/vorticity.
template <int D>
inline double compression_switch(const Mat<D>& grad_v) {
  double gn = frobenius_norm(grad_v);
  if (gn == 0.0) return 0.0;
  double div = trace(grad_v);
  return std::fmin(std::abs(div) / gn, 1.0);
}

template <int D>
struct ViscosityEval {
  Mat<D> stress;        // mu * sym(grad v)
  double mu = 0.0;      // total coefficient
  double length = 0.0;  // length scale used (zero when disabled)
};

// Tensor artificial viscosity. The length scale is the frozen initial
// cell scale l0 = V0^(1/D) / k. Tracking the current deformation along
// the compression eigenvector (l_s = l0 * |F s|) was tried and removed:
// it shrinks quadratically in the dominant term exactly where a cell
// corner starts to crush, so the resistance fades as the collapse
// accelerates and the step size runs away to zero on corner-origin
// blasts. The frozen scale keeps the damping bounded below on a
// deforming mesh and is exact on the undeformed one. The linear term
// switches off entirely outside compression (most-compressive strain
// eigenvalue >= 0 gives psi1 = 0); the quadratic term follows the
// magnitude of that eigenvalue.
template <int D>
inline ViscosityEval<D> artificial_viscosity(const ViscositySettings& vs,
                                             double rho, double sound_speed,
                                             const Mat<D>& grad_v,
                                             double l0) {
  ViscosityEval<D> r;
  if (!vs.enabled) return r;
  Mat<D> eps = sym_velocity_gradient(grad_v);
  if (frobenius_norm(grad_v) == 0.0) return r;
  SymEig<D> eig = sym_eig(eps);
  double lam = eig.value[0];  // most compressive strain rate
  double psi0 = compression_switch(grad_v);
  double psi1 = (lam < 0.0) ? 1.0 : 0.0;
  r.length = l0;
  r.mu = rho * (vs.q2 * l0 * l0 * std::abs(lam) +
                vs.q1 * psi0 * psi1 * l0 * sound_speed);
  r.stress = r.mu * eps;
  return r;
}

}  // namespace lagwall
