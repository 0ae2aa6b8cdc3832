// Convenience umbrella header.
#pragma once

#include "sobolrob/densities.hpp"
#include "sobolrob/frechet.hpp"
#include "sobolrob/models.hpp"
#include "sobolrob/partition.hpp"
#include "sobolrob/pipeline.hpp"
#include "sobolrob/report_io.hpp"
#include "sobolrob/reweight.hpp"
#include "sobolrob/rng.hpp"
#include "sobolrob/sobol.hpp"
