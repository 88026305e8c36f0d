#pragma once

// umbrella header

#include "numeric.hpp"
#include "core.hpp"
#include "analysis.hpp"
#include "geometry.hpp"
#include "probmodel.hpp"
#include "mc.hpp"
