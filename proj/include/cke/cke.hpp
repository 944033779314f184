#pragma once

// Umbrella header for the numerical core (Eigen only).

#include "cke/doubled_algebra.hpp"
#include "cke/errors.hpp"
#include "cke/homodyne.hpp"
#include "cke/interconnect.hpp"
#include "cke/lyapunov.hpp"
#include "cke/qsystem.hpp"
#include "cke/realizability.hpp"
#include "cke/synthesis.hpp"
