#pragma once

// Umbrella header for the PI proximal-gradient dynamics library.

#include "pipgd/analysis.hpp"
#include "pipgd/core.hpp"
#include "pipgd/dynamics.hpp"
#include "pipgd/eig.hpp"
#include "pipgd/integrate.hpp"
#include "pipgd/ot.hpp"
#include "pipgd/problems.hpp"
#include "pipgd/prox.hpp"
#include "pipgd/rng.hpp"
#include "pipgd/types.hpp"
