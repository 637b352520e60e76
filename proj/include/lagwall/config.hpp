#pragma once

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lagwall {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key = value run configuration. Every key is validated; unknown keys
// are fatal. serialize() emits the full key set with round-trippable floats,
// so parse(serialize(c)) reproduces c bitwise.
struct RunConfig {
  std::string problem = "sedov_square";
  std::string mesh_file;           // custom_mesh only
  int order = 2;                   // kinematic degree k (thermo is k-1)
  int res = 10;                    // per-problem resolution parameter
  int quad_points = 0;             // 1D quadrature points per cell, 0 -> k+2
  double gamma = 1.4;
  double energy = 1.0;             // full blast energy; domain gets its wedge share
  bool viscosity = true;
  double q1 = 0.5;
  double q2 = 2.0;
  std::string wall_mode = "weak";  // weak | strong_axis_aligned
  double beta = -1.0;              // velocity penalty scale, <0 -> default
  double cfl = 0.5;
  double dt_init = 1e-4;
  double dt_max = 1e-2;
  double t_final = 0.8;
  double growth = 1.02;
  double shrink = 0.5;
  int max_rejects = 20;
  long max_steps = 10000000;
  int output_every = 10;           // history cadence in steps
  std::string output_dir = ".";
  bool csv = true;                 // write <output_dir>/history.csv
  bool vtk = false;                // write <output_dir>/fields_NNNNN.vtk
  int vtk_every = 0;               // snapshot cadence in outputs, 0 -> final only
  int threads = 0;                 // worker threads, 0 -> inherit HYDRO_THREADS
  std::array<double, 8> corners = {0.0, 0.0, 1.2, 0.0, 1.2, 0.6, 0.0, 1.0};
  double hole_radius = 0.15;
  double hole_angle = 0.78539816339744831;
  double disc_radius = 1.0;

  bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& v, const std::string& key) {
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("key '" + key + "': not a number: '" + v + "'");
  return x;
}

inline long parse_long(const std::string& v, const std::string& key) {
  char* end = nullptr;
  long x = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("key '" + key + "': not an integer: '" + v + "'");
  return x;
}

inline bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + key + "': not a boolean: '" + v + "'");
}

inline std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

inline void apply_config_key(RunConfig& c, const std::string& key,
                             const std::string& value) {
  using detail::parse_bool;
  using detail::parse_double;
  using detail::parse_long;
  if (key == "problem") c.problem = value;
  else if (key == "mesh_file") c.mesh_file = value;
  else if (key == "order") c.order = (int)parse_long(value, key);
  else if (key == "res") c.res = (int)parse_long(value, key);
  else if (key == "quad_points") c.quad_points = (int)parse_long(value, key);
  else if (key == "gamma") c.gamma = parse_double(value, key);
  else if (key == "energy") c.energy = parse_double(value, key);
  else if (key == "viscosity") c.viscosity = parse_bool(value, key);
  else if (key == "q1") c.q1 = parse_double(value, key);
  else if (key == "q2") c.q2 = parse_double(value, key);
  else if (key == "wall_mode") c.wall_mode = value;
  else if (key == "beta") c.beta = parse_double(value, key);
  else if (key == "cfl") c.cfl = parse_double(value, key);
  else if (key == "dt_init") c.dt_init = parse_double(value, key);
  else if (key == "dt_max") c.dt_max = parse_double(value, key);
  else if (key == "t_final") c.t_final = parse_double(value, key);
  else if (key == "growth") c.growth = parse_double(value, key);
  else if (key == "shrink") c.shrink = parse_double(value, key);
  else if (key == "max_rejects") c.max_rejects = (int)parse_long(value, key);
  else if (key == "max_steps") c.max_steps = parse_long(value, key);
  else if (key == "output_every") c.output_every = (int)parse_long(value, key);
  else if (key == "output_dir") c.output_dir = value;
  else if (key == "csv") c.csv = parse_bool(value, key);
  else if (key == "vtk") c.vtk = parse_bool(value, key);
  else if (key == "vtk_every") c.vtk_every = (int)parse_long(value, key);
  else if (key == "threads") c.threads = (int)parse_long(value, key);
  else if (key == "corners") {
    std::stringstream ss(value);
    std::string item;
    int i = 0;
    while (std::getline(ss, item, ',')) {
      if (i >= 8) throw ConfigError("key 'corners': expected 8 values");
      c.corners[i++] = parse_double(detail::trim(item), key);
    }
    if (i != 8) throw ConfigError("key 'corners': expected 8 values");
  }
  else if (key == "hole_radius") c.hole_radius = parse_double(value, key);
  else if (key == "hole_angle") c.hole_angle = parse_double(value, key);
  else if (key == "disc_radius") c.disc_radius = parse_double(value, key);
  else throw ConfigError("unknown config key '" + key + "'");
}

inline RunConfig parse_config(std::istream& in, RunConfig base = {}) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected 'key = value', got '" + line + "'");
    std::string key = detail::trim(line.substr(0, eq));
    std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    try {
      apply_config_key(base, key, value);
    } catch (const ConfigError& err) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + err.what());
    }
  }
  return base;
}

inline RunConfig parse_config_file(const std::string& path,
                                   RunConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, base);
}

inline std::string serialize_config(const RunConfig& c) {
  using detail::fmt_double;
  std::string out;
  auto kv = [&out](const std::string& k, const std::string& v) {
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  };
  kv("problem", c.problem);
  kv("mesh_file", c.mesh_file);
  kv("order", std::to_string(c.order));
  kv("res", std::to_string(c.res));
  kv("quad_points", std::to_string(c.quad_points));
  kv("gamma", fmt_double(c.gamma));
  kv("energy", fmt_double(c.energy));
  kv("viscosity", c.viscosity ? "true" : "false");
  kv("q1", fmt_double(c.q1));
  kv("q2", fmt_double(c.q2));
  kv("wall_mode", c.wall_mode);
  kv("beta", fmt_double(c.beta));
  kv("cfl", fmt_double(c.cfl));
  kv("dt_init", fmt_double(c.dt_init));
  kv("dt_max", fmt_double(c.dt_max));
  kv("t_final", fmt_double(c.t_final));
  kv("growth", fmt_double(c.growth));
  kv("shrink", fmt_double(c.shrink));
  kv("max_rejects", std::to_string(c.max_rejects));
  kv("max_steps", std::to_string(c.max_steps));
  kv("output_every", std::to_string(c.output_every));
  kv("output_dir", c.output_dir);
  kv("csv", c.csv ? "true" : "false");
  kv("vtk", c.vtk ? "true" : "false");
  kv("vtk_every", std::to_string(c.vtk_every));
  kv("threads", std::to_string(c.threads));
  {
    std::string v;
    for (int i = 0; i < 8; ++i) {
      if (i) v += ",";
      v += fmt_double(c.corners[i]);
    }
    kv("corners", v);
  }
  kv("hole_radius", fmt_double(c.hole_radius));
  kv("hole_angle", fmt_double(c.hole_angle));
  kv("disc_radius", fmt_double(c.disc_radius));
  return out;
}

inline void validate_config(const RunConfig& c) {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  static const char* problems[] = {"sedov_square", "sedov_trapezoid",
                                   "sedov_disc",   "sedov_hole_circle",
                                   "sedov_hole_square", "custom_mesh"};
  bool known = false;
  for (const char* p : problems) known = known || c.problem == p;
  if (!known) fail("unknown problem '" + c.problem + "'");
  if (c.problem == "custom_mesh" && c.mesh_file.empty())
    fail("custom_mesh requires mesh_file");
  if (c.order < 1) fail("order must be >= 1");
  if (c.problem == "sedov_disc" && c.order < 2)
    fail("sedov_disc requires order >= 2 (curved boundary)");
  if (c.res < 1) fail("res must be >= 1");
  if (c.quad_points != 0 && c.quad_points < 2)
    fail("quad_points must be 0 (default) or >= 2");
  if (!(c.gamma > 1.0)) fail("gamma must be > 1");
  if (!(c.energy > 0.0)) fail("energy must be > 0");
  if (c.q1 < 0.0 || c.q2 < 0.0) fail("q1/q2 must be >= 0");
  if (c.wall_mode != "weak" && c.wall_mode != "strong_axis_aligned")
    fail("wall_mode must be weak or strong_axis_aligned");
  if (!(c.cfl > 0.0)) fail("cfl must be > 0");
  if (!(c.dt_init > 0.0)) fail("dt_init must be > 0");
  if (!(c.dt_max > 0.0)) fail("dt_max must be > 0");
  if (c.t_final < 0.0) fail("t_final must be >= 0");
  if (!(c.growth >= 1.0)) fail("growth must be >= 1");
  if (!(c.shrink > 0.0 && c.shrink < 1.0)) fail("shrink must be in (0,1)");
  if (c.max_rejects < 1) fail("max_rejects must be >= 1");
  if (c.max_steps < 1) fail("max_steps must be >= 1");
  if (c.output_every < 1) fail("output_every must be >= 1");
  if (c.vtk_every < 0) fail("vtk_every must be >= 0");
  if (c.threads < 0) fail("threads must be >= 0");
  if (!(c.hole_radius > 0.0)) fail("hole_radius must be > 0");
  if (!(c.disc_radius > 0.0)) fail("disc_radius must be > 0");
}

}  // namespace lagwall
