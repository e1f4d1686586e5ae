#pragma once

// Umbrella header.

#include "enclosure/certification.hpp"
#include "enclosure/config.hpp"
#include "enclosure/csv.hpp"
#include "enclosure/discretization.hpp"
#include "enclosure/experiments.hpp"
#include "enclosure/indicator.hpp"
#include "enclosure/quadrature.hpp"
#include "enclosure/series_solution.hpp"
#include "enclosure/types.hpp"
