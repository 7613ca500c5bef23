#pragma once

// Umbrella header for the voromesh library.

#include "energy.hpp"
#include "lbfgs.hpp"
#include "mesh.hpp"
#include "metrics.hpp"
#include "optimizer.hpp"
#include "quadrature.hpp"
#include "remesh.hpp"
#include "rvd.hpp"
#include "spatial.hpp"
#include "vec3.hpp"
