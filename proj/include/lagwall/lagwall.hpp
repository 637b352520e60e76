#pragma once

// Umbrella header for the moving-mesh gas-dynamics library: high-order
// kinematic/thermodynamic element pair, matrix-free corner-force operator,
// penalty wall treatment with a time-constant kinematic mass matrix,
// conservative two-stage time stepping, diagnostics, and the app layer.

#include "algebra.hpp"
#include "basis.hpp"
#include "config.hpp"
#include "diagnostics.hpp"
#include "force.hpp"
#include "history.hpp"
#include "integrator.hpp"
#include "mass.hpp"
#include "mesh.hpp"
#include "physics.hpp"
#include "problem.hpp"
#include "quaddata.hpp"
#include "sedov.hpp"
#include "spaces.hpp"
#include "threading.hpp"
#include "vtk.hpp"
