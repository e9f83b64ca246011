#pragma once

// Umbrella header for the ville library: stage-by-stage construction of
// sequences witnessing Ville's theorem, plus the verifiers and analysis
// tooling around them.

#include "ville/analysis.hpp"
#include "ville/bits.hpp"
#include "ville/construction.hpp"
#include "ville/driver.hpp"
#include "ville/errors.hpp"
#include "ville/family.hpp"
#include "ville/io.hpp"
#include "ville/selection.hpp"
#include "ville/threshold.hpp"
