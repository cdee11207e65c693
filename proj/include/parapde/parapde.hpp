#pragma once

#include "parapde/differentiate.hpp"
#include "parapde/features.hpp"
#include "parapde/grid.hpp"
#include "parapde/io.hpp"
#include "parapde/noise.hpp"
#include "parapde/profiles.hpp"
#include "parapde/rng.hpp"
#include "parapde/sampling.hpp"
#include "parapde/select.hpp"
#include "parapde/simulate.hpp"
#include "parapde/solvers.hpp"
#include "parapde/spectral.hpp"
#include "parapde/terms.hpp"
