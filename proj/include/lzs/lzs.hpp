#pragma once

// Umbrella header for the library.

#include "lzs/bessel.hpp"
#include "lzs/config.hpp"
#include "lzs/constants.hpp"
#include "lzs/errors.hpp"
#include "lzs/evolve.hpp"
#include "lzs/kinetics.hpp"
#include "lzs/level_diagram.hpp"
#include "lzs/linalg.hpp"
#include "lzs/parallel.hpp"
#include "lzs/rates.hpp"
#include "lzs/spectrum.hpp"
#include "lzs/sweep.hpp"
