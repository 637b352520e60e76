#pragma once

#include <functional>
#include <stdexcept>

#include "lagwall/force.hpp"
#include "lagwall/mass.hpp"

namespace lagwall {

template <int D>
struct HydroState {
  double t = 0;
  std::vector<double> x;  // positions, n_kin * D interleaved
  std::vector<double> v;  // velocities, same layout
  std::vector<double> e;  // specific internal energy, thermodynamic dofs
};

struct StepControls {
  double cfl = 0.5;
  double dt_init = 1e-4;  // cap on the very first step
  double dt_max = 1e-2;
  double t_final = 1.0;
  double growth = 1.02;  // max dt growth per accepted step
  double shrink = 0.5;   // dt cut on rejection
  int max_rejects = 20;
  long max_steps = 10000000;
};

struct StepInfo {
  double dt = 0;
  int rejects = 0;
  int cg_iters = 0;
  double min_detj = 0;
};

// Midpoint state captured for conservation audits: the exact arguments the
// second force evaluation saw, and the dt that advanced the step.
template <int D>
struct StepTrace {
  std::vector<double> x, v, e;
  double dt = 0;
};

// Two-stage midpoint-average update. Stage one advances velocity a half
// step and feeds the already-updated half velocity into the energy update;
// stage two advances the full step with the midpoint force, using the
// time-averaged velocity in both the energy and position updates. With the
// zero source hooks this conserves total energy to solver tolerance.
template <int D>
class TimeIntegrator {
 public:
  TimeIntegrator(const Mesh<D>& mesh, const Spaces<D>& spaces,
                 const QuadData<D>& qd, const KinematicMass<D>& mv,
                 const ThermoMass<D>& me, ForceSettings<D> fs)
      : mesh_(mesh),
        spaces_(spaces),
        qd_(qd),
        mv_(mv),
        me_(me),
        force_(fs) {}

  const ForceEvaluator<D>& force() const { return force_; }

  // Optional zero-default sources: body force B (momentum layout) and
  // energy source R (thermodynamic layout), added to the respective
  // right-hand sides when set.
  void set_sources(std::vector<double> body_force,
                   std::vector<double> energy_source) {
    body_force_ = std::move(body_force);
    energy_source_ = std::move(energy_source);
  }

  // One accepted step, retrying internally with dt cuts on rejection.
  StepInfo advance(HydroState<D>& s, const StepControls& c,
                   StepTrace<D>* trace = nullptr) {
    ForceResult<D>& fn = fr_n_;
    force_.evaluate(mesh_, spaces_, qd_, s.x, s.v, s.e, fn);
    if (fn.tangled)
      throw std::runtime_error("TimeIntegrator: state is tangled");
    double cap = first_step_ ? c.dt_init : c.growth * dt_prev_;
    double dt = std::fmin(std::fmin(c.cfl * fn.dt_ratio_min, c.dt_max), cap);
    if (!(dt > 0.0)) throw std::runtime_error("TimeIntegrator: dt underflow");

    std::vector<double>& an = a_n_;
    CgReport cg1 = solve_momentum(fn, warm1_, an);

    StepInfo info;
    info.cg_iters = cg1.iterations;
    for (int attempt = 0;; ++attempt) {
      if (attempt > c.max_rejects)
        throw std::runtime_error(
            "TimeIntegrator: too many consecutive step rejections");
      bool final_step = s.t + dt >= c.t_final;
      double dte = final_step ? c.t_final - s.t : dt;

      // Stage one: half state. Candidate vectors only; the committed state
      // is untouched until acceptance, so a rejection restores it bitwise.
      vh_.assign(s.v.begin(), s.v.end());
      axpy(0.5 * dte, an, vh_);
      force_.energy_rhs(mesh_, spaces_, qd_, fn, vh_, erhs_);
      add_energy_source(erhs_);
      edot_.resize(erhs_.size());
      me_.solve(erhs_, edot_);
      eh_.assign(s.e.begin(), s.e.end());
      axpy(0.5 * dte, edot_, eh_);
      xh_.assign(s.x.begin(), s.x.end());
      axpy(0.5 * dte, vh_, xh_);

      bool ok = energy_floor_ok(eh_);
      if (ok) {
        force_.evaluate(mesh_, spaces_, qd_, xh_, vh_, eh_, fr_h_);
        ok = !fr_h_.tangled;
      }
      if (ok) {
        if (trace) {
          trace->x = xh_;
          trace->v = vh_;
          trace->e = eh_;
          trace->dt = dte;
        }
        CgReport cg2 = solve_momentum(fr_h_, warm2_, ah_);
        info.cg_iters += cg2.iterations;
        // Stage two: time-averaged velocity drives energy and position.
        vbar_.assign(s.v.begin(), s.v.end());
        axpy(0.5 * dte, ah_, vbar_);
        v1_.assign(s.v.begin(), s.v.end());
        axpy(dte, ah_, v1_);
        force_.energy_rhs(mesh_, spaces_, qd_, fr_h_, vbar_, erhs_);
        add_energy_source(erhs_);
        me_.solve(erhs_, edot_);
        e1_.assign(s.e.begin(), s.e.end());
        axpy(dte, edot_, e1_);
        x1_.assign(s.x.begin(), s.x.end());
        axpy(dte, vbar_, x1_);

        info.min_detj = force_.min_detj(mesh_, spaces_, qd_, x1_);
        ok = info.min_detj > 0.0 && energy_floor_ok(e1_);
      }
      if (!ok) {
        ++info.rejects;
        dt *= c.shrink;
        if (!(dt > 0.0))
          throw std::runtime_error("TimeIntegrator: dt underflow");
        continue;
      }
      s.x.swap(x1_);
      s.v.swap(v1_);
      s.e.swap(e1_);
      s.t = final_step ? c.t_final : s.t + dte;
      dt_prev_ = dte;
      first_step_ = false;
      info.dt = dte;
      return info;
    }
  }

  // Advances to t_final; emits the state to on_output at step 0, every
  // output_every accepted steps, and at the final step.
  long run(HydroState<D>& s, const StepControls& c, long output_every,
           const std::function<void(long, const StepInfo&,
                                    const HydroState<D>&)>& on_output) {
    long step = 0;
    if (on_output) on_output(0, StepInfo{}, s);
    double span = std::fmax(1.0, std::abs(c.t_final));
    while (s.t < c.t_final - 1e-14 * span) {
      if (step >= c.max_steps)
        throw std::runtime_error("TimeIntegrator: step budget exhausted");
      StepInfo info = advance(s, c);
      ++step;
      bool done = s.t >= c.t_final - 1e-14 * span;
      if (on_output && (done || (output_every > 0 && step % output_every == 0)))
        on_output(step, info, s);
    }
    return step;
  }

  // Mass-weighted element means of a thermodynamic vector must stay above
  // the rejection floor (tiny negative undershoots are integration noise,
  // sustained negativity marks a broken step).
  bool energy_floor_ok(std::span<const double> e) const {
    int nb = me_.block_size();
    for (int el = 0; el < me_.n_elems(); ++el) {
      double num = 0, den = 0;
      for (int l = 0; l < nb; ++l) {
        double wl = me_.row_sum(el, l);
        num += wl * e[size_t(el) * nb + l];
        den += wl;
      }
      if (num / den < -1e-12) return false;
    }
    return true;
  }

  double last_dt() const { return dt_prev_; }

 private:
  CgReport solve_momentum(const ForceResult<D>& fr, std::vector<double>& warm,
                          std::vector<double>& out) {
    rhs_.assign(fr.momentum_rhs.begin(), fr.momentum_rhs.end());
    if (!body_force_.empty()) axpy(1.0, body_force_, rhs_);
    CgReport rep = mv_.solve(rhs_, warm);
    out = warm;
    return rep;
  }
  void add_energy_source(std::vector<double>& r) const {
    if (!energy_source_.empty()) axpy(1.0, energy_source_, r);
  }

  const Mesh<D>& mesh_;
  const Spaces<D>& spaces_;
  const QuadData<D>& qd_;
  const KinematicMass<D>& mv_;
  const ThermoMass<D>& me_;
  ForceEvaluator<D> force_;
  std::vector<double> body_force_, energy_source_;

  bool first_step_ = true;
  double dt_prev_ = 0;
  ForceResult<D> fr_n_, fr_h_;
  std::vector<double> warm1_, warm2_, a_n_, ah_, rhs_, erhs_, edot_;
  std::vector<double> vh_, eh_, xh_, vbar_, v1_, e1_, x1_;
};

}  // namespace lagwall
