#pragma once

// Umbrella header for the fixed-point iteration laboratory.

#include "fixpoint/analysis.hpp"
#include "fixpoint/errors.hpp"
#include "fixpoint/iteration.hpp"
#include "fixpoint/mappings.hpp"
#include "fixpoint/numeric.hpp"
#include "fixpoint/sampling.hpp"
#include "fixpoint/scenario.hpp"
#include "fixpoint/sequences.hpp"
#include "fixpoint/spaces.hpp"
#include "fixpoint/trace_io.hpp"
