// Command-line driver: configures a blast-wave benchmark (or a custom
// mesh), advances it to t_final, and writes the CSV history plus optional
// VTK snapshots. Exit codes: 0 success, 2 configuration error, 3 runtime
// failure (tangling exhaustion, I/O).

#include <cstdio>
#include <cstdlib>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <lagwall/lagwall.hpp>

namespace {

struct CliOverrides {
  std::optional<std::string> problem, wall_mode, output_dir, mesh_file;
  std::optional<int> order, res, quad_points, output_every, vtk_every, threads;
  std::optional<double> tfinal, energy, gamma, cfl, beta, dt_init, dt_max;
  std::optional<bool> vtk, csv, viscosity;
};

void apply(lagwall::RunConfig& cfg, const CliOverrides& o) {
  if (o.problem) cfg.problem = *o.problem;
  if (o.wall_mode) cfg.wall_mode = *o.wall_mode;
  if (o.output_dir) cfg.output_dir = *o.output_dir;
  if (o.mesh_file) cfg.mesh_file = *o.mesh_file;
  if (o.order) cfg.order = *o.order;
  if (o.res) cfg.res = *o.res;
  if (o.quad_points) cfg.quad_points = *o.quad_points;
  if (o.output_every) cfg.output_every = *o.output_every;
  if (o.vtk_every) cfg.vtk_every = *o.vtk_every;
  if (o.threads) cfg.threads = *o.threads;
  if (o.tfinal) cfg.t_final = *o.tfinal;
  if (o.energy) cfg.energy = *o.energy;
  if (o.gamma) cfg.gamma = *o.gamma;
  if (o.cfl) cfg.cfl = *o.cfl;
  if (o.beta) cfg.beta = *o.beta;
  if (o.dt_init) cfg.dt_init = *o.dt_init;
  if (o.dt_max) cfg.dt_max = *o.dt_max;
  if (o.vtk) cfg.vtk = *o.vtk;
  if (o.csv) cfg.csv = *o.csv;
  if (o.viscosity) cfg.viscosity = *o.viscosity;
}

int run(const lagwall::RunConfig& cfg, bool quiet) {
  using namespace lagwall;
  if (cfg.threads > 0) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%d", cfg.threads);
    setenv("HYDRO_THREADS", buf, 1);
  }
  auto ps = build_problem(cfg);

  std::unique_ptr<HistoryWriter<2>> hist;
  if (cfg.csv)
    hist = std::make_unique<HistoryWriter<2>>(cfg.output_dir + "/history.csv");

  long snapshots = 0, outputs = 0;
  auto snapshot = [&](const HydroState<2>& s) {
    char name[64];
    std::snprintf(name, sizeof name, "/fields_%05ld.vtk", snapshots++);
    write_vtk(cfg.output_dir + name, ps->mesh, ps->spaces, s);
  };

  auto on_output = [&](long step, const StepInfo& info,
                       const HydroState<2>& s) {
    auto rep = conservation_report(ps->mesh, ps->spaces, ps->qd, ps->mv,
                                   ps->me, s);
    double bv = boundary_violation(ps->mesh, ps->spaces, ps->qd, s);
    auto front = shock_front_radius(ps->mesh, ps->spaces, s, ps->fan);
    if (hist) hist->row(step, s.t, info.dt, rep, bv, front);
    if (cfg.vtk && cfg.vtk_every > 0 && outputs % cfg.vtk_every == 0)
      snapshot(s);
    ++outputs;
    if (!quiet)
      std::printf("step %6ld  t %.6f  dt %.3e  E %.12f  bviol %.3e  r %.4f\n",
                  step, s.t, info.dt, rep.total, bv,
                  front.found ? front.radius : 0.0);
  };

  double e0 = conservation_report(ps->mesh, ps->spaces, ps->qd, ps->mv,
                                  ps->me, ps->state)
                  .total;
  long steps =
      ps->integrator.run(ps->state, ps->controls, cfg.output_every, on_output);
  if (cfg.vtk) snapshot(ps->state);
  if (hist) hist->flush();

  auto rep = conservation_report(ps->mesh, ps->spaces, ps->qd, ps->mv, ps->me,
                                 ps->state);
  auto front = shock_front_radius(ps->mesh, ps->spaces, ps->state, ps->fan);
  if (!quiet) {
    std::printf("done: %ld steps to t=%.6f, E_total=%.12f (drift %.3e)\n",
                steps, ps->state.t, rep.total, std::abs(rep.total - e0));
    if (front.found)
      std::printf("shock radius %.6f (reference %.6f)\n", front.radius,
                  ps->ref.shock_radius(ps->state.t));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"High-order moving-mesh gas dynamics with penalty walls"};
  std::string config_path;
  bool validate_only = false, quiet = false;
  CliOverrides o;

  app.add_option("--config", config_path, "Config file (key = value lines)");
  app.add_option("--problem", o.problem,
                 "sedov_square|sedov_trapezoid|sedov_disc|sedov_hole_circle|"
                 "sedov_hole_square|custom_mesh");
  app.add_option("--mesh-file", o.mesh_file, "Mesh file for custom_mesh");
  app.add_option("--order", o.order, "Kinematic polynomial degree k");
  app.add_option("--res", o.res, "Mesh resolution parameter");
  app.add_option("--quad-points", o.quad_points,
                 "1D quadrature points (0 = default k+2)");
  app.add_option("--tfinal", o.tfinal, "Final time");
  app.add_option("--energy", o.energy, "Blast energy");
  app.add_option("--gamma", o.gamma, "Adiabatic index");
  app.add_option("--cfl", o.cfl, "CFL number");
  app.add_option("--dt-init", o.dt_init, "First-step dt cap");
  app.add_option("--dt-max", o.dt_max, "Global dt cap");
  app.add_option("--beta", o.beta, "Velocity penalty scale (<0 = default)");
  app.add_option("--wall-mode", o.wall_mode, "weak|strong_axis_aligned");
  app.add_option("--viscosity", o.viscosity, "Enable artificial viscosity");
  app.add_option("--output-dir", o.output_dir, "Output directory");
  app.add_option("--output-every", o.output_every, "History cadence (steps)");
  app.add_option("--csv", o.csv, "Write history.csv");
  app.add_option("--vtk", o.vtk, "Write VTK snapshots");
  app.add_option("--vtk-every", o.vtk_every,
                 "Snapshot cadence in outputs (0 = final only)");
  app.add_option("--threads", o.threads, "Worker threads (0 = env)");
  app.add_flag("--validate-config", validate_only,
               "Parse and validate, print canonical config, exit");
  app.add_flag("--quiet", quiet, "Suppress progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  lagwall::RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = lagwall::parse_config_file(config_path);
    apply(cfg, o);
    lagwall::validate_config(cfg);
  } catch (const lagwall::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }

  if (validate_only) {
    std::fputs(lagwall::serialize_config(cfg).c_str(), stdout);
    return 0;
  }

  try {
    return run(cfg, quiet);
  } catch (const lagwall::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fatal: %s\n", e.what());
    return 3;
  }
}
