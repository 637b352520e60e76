#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "lagwall/algebra.hpp"

namespace lagwall {

// Self-similar point-blast solution (Sedov-Taylor) for an ideal gas in a
// uniform cold ambient medium, used as the convergence oracle for the blast
// benchmarks. The similarity profiles are integrated numerically, so no
// tabulated constants enter: with xi = r / r_shock(t) and a = 2/(n+2),
//
//   u = a (r/t) f(xi),  rho = rho0 g(xi),  p = rho0 a^2 (r/t)^2 h(xi),
//
// the Euler equations reduce to a linear system for the log-derivatives
// (F,G,H) = d(f,g,h)/d(ln xi):
//
//   g F + (f-1) G            = -n f g                 (mass)
//   a(f-1) F + (a/g) H       = f - a f^2 - 2 a h / g  (momentum)
//   -gamma a (f-1)/g G + a(f-1)/h H = 2 (1 - a f)     (entropy)
//
// integrated inward from the strong-shock jump values at xi = 1. The blast
// scale xi0 follows from the energy integral
//   I = int_0^1 (g f^2/2 + h/(gamma-1)) xi^(n+1) dxi,
//   xi0 = ((n+2)^2 / (4 S_n I))^(1/(n+2)),  S_2 = 2 pi, S_3 = 4 pi,
// and the front is at r_shock(t) = xi0 (E t^2 / rho0)^(1/(n+2)).
class SedovReference {
 public:
  SedovReference(double gamma, int dim, double rho0 = 1.0, double energy = 1.0)
      : gamma_(gamma), n_(dim), rho0_(rho0), energy_(energy) {
    if (!(gamma > 1.0)) throw std::invalid_argument("SedovReference: gamma");
    if (dim != 2 && dim != 3) throw std::invalid_argument("SedovReference: dim");
    if (!(rho0 > 0.0) || !(energy > 0.0))
      throw std::invalid_argument("SedovReference: rho0/energy");
    integrate();
  }

  double xi0() const { return xi0_; }
  double energy_integral() const { return integral_; }

  double shock_radius(double t) const {
    if (!(t > 0.0)) return 0.0;
    return xi0_ * std::pow(energy_ * t * t / rho0_, 1.0 / (n_ + 2));
  }

  struct PointState {
    double rho = 0, u = 0, p = 0;
  };

  // Profile at radius r, time t. Ahead of the front: cold ambient state.
  PointState evaluate(double r, double t) const {
    PointState ps{rho0_, 0.0, 0.0};
    double rs = shock_radius(t);
    if (!(t > 0.0) || r >= rs) return ps;
    double a = 2.0 / (n_ + 2);
    double lam = std::log(std::fmax(r / rs, 1e-300));
    double f, g, h;
    profile(lam, f, g, h);
    ps.u = a * (r / t) * f;
    ps.rho = rho0_ * g;
    ps.p = rho0_ * a * a * (r / t) * (r / t) * h;
    return ps;
  }

 private:
  void profile(double lam, double& f, double& g, double& h) const {
    if (lam >= 0.0) {
      f = f_.front();
      g = g_.front();
      h = h_.front();
      return;
    }
    double pos = -lam / dlam_;
    size_t i = static_cast<size_t>(pos);
    if (i + 1 >= f_.size()) {
      f = f_.back();
      g = g_.back();
      h = h_.back();
      return;
    }
    double w = pos - i;
    f = (1 - w) * f_[i] + w * f_[i + 1];
    g = (1 - w) * g_[i] + w * g_[i + 1];
    h = (1 - w) * h_[i] + w * h_[i + 1];
  }

  // d(f,g,h,I)/d(lambda); returns false at a singular similarity point.
  bool rhs(const double y[4], double dy[4]) const {
    double f = y[0], g = y[1], h = y[2];
    double a = 2.0 / (n_ + 2);
    double A[3][4] = {
        {g, f - 1.0, 0.0, -n_ * f * g},
        {a * (f - 1.0), 0.0, a / g, f - a * f * f - 2.0 * a * h / g},
        {0.0, -gamma_ * a * (f - 1.0) / g, a * (f - 1.0) / h,
         2.0 * (1.0 - a * f)}};
    // 3x3 Gaussian elimination with partial pivoting.
    int piv[3] = {0, 1, 2};
    for (int c = 0; c < 3; ++c) {
      int best = c;
      for (int r = c + 1; r < 3; ++r)
        if (std::abs(A[piv[r]][c]) > std::abs(A[piv[best]][c])) best = r;
      std::swap(piv[c], piv[best]);
      double d = A[piv[c]][c];
      if (std::abs(d) < 1e-13) return false;
      for (int r = c + 1; r < 3; ++r) {
        double m = A[piv[r]][c] / d;
        for (int cc = c; cc < 4; ++cc) A[piv[r]][cc] -= m * A[piv[c]][cc];
      }
    }
    double sol[3];
    for (int c = 2; c >= 0; --c) {
      double s = A[piv[c]][3];
      for (int cc = c + 1; cc < 3; ++cc) s -= A[piv[c]][cc] * sol[cc];
      sol[c] = s / A[piv[c]][c];
    }
    dy[0] = sol[0];
    dy[1] = sol[1];
    dy[2] = sol[2];
    return true;
  }

  void integrate() {
    const int steps = 60000;
    const double lam_min = std::log(1e-8);
    dlam_ = -lam_min / steps;
    double f = 2.0 / (gamma_ + 1.0);
    double g = (gamma_ + 1.0) / (gamma_ - 1.0);
    double h = 2.0 / (gamma_ + 1.0);
    f_.assign(1, f);
    g_.assign(1, g);
    h_.assign(1, h);
    double lam = 0.0, I = 0.0;
    auto integrand = [&](double lf, double lg, double lh, double ll) {
      double xi = std::exp(ll);
      return (0.5 * lg * lf * lf + lh / (gamma_ - 1.0)) *
             std::pow(xi, n_ + 2);
    };
    // The trajectory approaches f -> 1/gamma (velocity linear in r, density a
    // power law, pressure constant near the center); the system is singular on
    // that manifold, so once f is within 1e-7 of it switch to the exact
    // asymptotic continuation: f frozen, d(ln g)/dlam = n/(gamma-1), and
    // d(ln h)/dlam from the entropy relation evaluated at the limit.
    const double fc = 1.0 / gamma_;
    const double a = 2.0 / (n_ + 2);
    const double gexp = n_ / (gamma_ - 1.0);
    const double hexp = gamma_ * gexp + 2.0 * (1.0 - a * fc) / (a * (fc - 1.0));
    bool asymptotic = false;
    for (int s = 0; s < steps; ++s) {
      double hstep = -dlam_;
      if (!asymptotic && f - fc < 1e-7) asymptotic = true;
      if (asymptotic) {
        double Ia = integrand(fc, g, h, lam);
        double gm = g * std::exp(0.5 * hstep * gexp);
        double hm = h * std::exp(0.5 * hstep * hexp);
        double Im = integrand(fc, gm, hm, lam + 0.5 * hstep);
        g *= std::exp(hstep * gexp);
        h *= std::exp(hstep * hexp);
        lam += hstep;
        f = fc;
        I += hstep / 6.0 * (Ia + 4.0 * Im + integrand(fc, g, h, lam));
        f_.push_back(f);
        g_.push_back(g);
        h_.push_back(h);
        continue;
      }
      double y0[4] = {f, g, h, lam};
      double k1[4], k2[4], k3[4], k4[4];
      auto eval = [&](const double y[4], double k[4]) {
        if (!rhs(y, k)) return false;
        k[3] = 1.0;  // lambda itself
        return true;
      };
      double tmp[4], mid[4];
      bool ok = true;
      ok = ok && eval(y0, k1);
      if (ok) for (int i = 0; i < 4; ++i) tmp[i] = y0[i] + 0.5 * hstep * k1[i];
      ok = ok && eval(tmp, k2);
      if (ok) for (int i = 0; i < 4; ++i) mid[i] = y0[i] + 0.5 * hstep * k2[i];
      ok = ok && eval(mid, k3);
      if (ok) for (int i = 0; i < 4; ++i) tmp[i] = y0[i] + hstep * k3[i];
      ok = ok && eval(tmp, k4);
      if (!ok) {  // singular before the switch fired: continue asymptotically
        asymptotic = true;
        --s;
        continue;
      }
      // Simpson accumulation of the energy integral over the step, with the
      // stage-three midpoint as the interior sample.
      double Ia = integrand(y0[0], y0[1], y0[2], y0[3]);
      double Im = integrand(mid[0], mid[1], mid[2], mid[3]);
      for (int i = 0; i < 4; ++i)
        y0[i] += hstep / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
      double Ib = integrand(y0[0], y0[1], y0[2], y0[3]);
      I += hstep / 6.0 * (Ia + 4.0 * Im + Ib);
      f = y0[0];
      g = y0[1];
      h = y0[2];
      lam = y0[3];
      if (!(g > 0.0) || !(h > 0.0) || !std::isfinite(f + g + h)) {
        asymptotic = true;
        f = fc;
        if (!(g > 0.0) || !std::isfinite(g)) g = g_.back();
        if (!(h > 0.0) || !std::isfinite(h)) h = h_.back();
      }
      f_.push_back(f);
      g_.push_back(g);
      h_.push_back(h);
    }
    integral_ = -I;  // integration ran toward smaller lambda
    double sn = (n_ == 2) ? 2.0 * M_PI : 4.0 * M_PI;
    double npow = n_ + 2;
    xi0_ = std::pow(npow * npow / (4.0 * sn * integral_), 1.0 / npow);
  }

  double gamma_;
  int n_;
  double rho0_, energy_;
  double xi0_ = 0, integral_ = 0, dlam_ = 0;
  std::vector<double> f_, g_, h_;
};

}  // namespace lagwall
