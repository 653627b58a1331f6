#pragma once

// Umbrella header for the solver library.

#include "bench.hpp"
#include "config.hpp"
#include "generator.hpp"
#include "identification.hpp"
#include "json_io.hpp"
#include "problem.hpp"
#include "projection.hpp"
#include "reduced.hpp"
#include "solver.hpp"
#include "stationarity.hpp"
#include "steplength.hpp"
#include "svm.hpp"
#include "types.hpp"
