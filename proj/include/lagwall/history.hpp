#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

#include "diagnostics.hpp"

namespace lagwall {

// Run history CSV. One row per output interval with the fixed schema
//   step,t,dt,ke,ke_penalty,ie,etotal,px,py[,pz],bviol,shock_r
// written with round-trippable floats so sequential reruns are bit-exact.
// shock_r is 0 while no shock front is detectable.
template <int D>
class HistoryWriter {
 public:
  explicit HistoryWriter(const std::string& path) {
    f_ = std::fopen(path.c_str(), "wb");
    if (!f_)
      throw std::runtime_error("HistoryWriter: cannot open '" + path + "'");
    std::fprintf(f_, "step,t,dt,ke,ke_penalty,ie,etotal,px,py%s,bviol,shock_r\n",
                 D == 3 ? ",pz" : "");
  }
  HistoryWriter(const HistoryWriter&) = delete;
  HistoryWriter& operator=(const HistoryWriter&) = delete;
  ~HistoryWriter() {
    if (f_) std::fclose(f_);
  }

  void row(long step, double t, double dt, const ConservationReport<D>& rep,
           double bviol, const ShockFront& front) {
    std::fprintf(f_, "%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", step, t, dt,
                 rep.kinetic, rep.kinetic_penalty, rep.internal, rep.total);
    for (int d = 0; d < D; ++d) std::fprintf(f_, ",%.17g", rep.momentum[d]);
    std::fprintf(f_, ",%.17g,%.17g\n", bviol, front.found ? front.radius : 0.0);
  }

  void flush() {
    if (f_ && std::fflush(f_) != 0)
      throw std::runtime_error("HistoryWriter: flush failed");
  }

 private:
  std::FILE* f_ = nullptr;
};

}  // namespace lagwall
