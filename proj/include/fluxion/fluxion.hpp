#pragma once

// Umbrella header for the full toolkit.

#include "constants.hpp"
#include "errors.hpp"
#include "ode.hpp"
#include "params.hpp"
#include "hill.hpp"
#include "floquet.hpp"
#include "stability.hpp"
#include "drive.hpp"
#include "coupling.hpp"
#include "corrections.hpp"
#include "dynamics.hpp"
#include "io.hpp"
