#pragma once

// Umbrella header for the simulation library (the CLI front end lives in
// specsense/cli.hpp and is not included here to keep CLI11 optional).

#include "specsense/calibration.hpp"
#include "specsense/cooperative.hpp"
#include "specsense/detectors.hpp"
#include "specsense/entropy.hpp"
#include "specsense/errors.hpp"
#include "specsense/harness.hpp"
#include "specsense/metrics.hpp"
#include "specsense/parallel.hpp"
#include "specsense/rng.hpp"
#include "specsense/signal.hpp"
#include "specsense/spectral.hpp"
