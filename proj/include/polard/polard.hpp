#pragma once

// Umbrella header: dense kernels, test-matrix gallery, coupled polar/derivative
// iterations, independent oracles, and the shared matrix text format.

#include "polard/factorizations.hpp"
#include "polard/gallery.hpp"
#include "polard/matrix.hpp"
#include "polard/matrix_io.hpp"
#include "polard/oracles.hpp"
#include "polard/polar_iteration.hpp"
