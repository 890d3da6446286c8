#pragma once
// Umbrella header.

#include "ctns/calculus.hpp"
#include "ctns/cell_solver.hpp"
#include "ctns/config.hpp"
#include "ctns/diagnostics.hpp"
#include "ctns/errors.hpp"
#include "ctns/field_io.hpp"
#include "ctns/fields.hpp"
#include "ctns/fluid_solver.hpp"
#include "ctns/linear_solvers.hpp"
#include "ctns/manufactured.hpp"
#include "ctns/signal_solver.hpp"
#include "ctns/simulation.hpp"
#include "ctns/studies.hpp"
#include "ctns/weak_residuals.hpp"
