#pragma once

// Umbrella header for the numerical library (everything except the CLI layer).

#include "agepop/controllers.hpp"
#include "agepop/equilibrium.hpp"
#include "agepop/error.hpp"
#include "agepop/grid.hpp"
#include "agepop/linalg2.hpp"
#include "agepop/lyapunov.hpp"
#include "agepop/model.hpp"
#include "agepop/roa.hpp"
#include "agepop/simulate.hpp"
#include "agepop/trajectory.hpp"
#include "agepop/transform.hpp"
