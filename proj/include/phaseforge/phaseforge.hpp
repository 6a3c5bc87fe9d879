#pragma once

#include "phaseforge/compiler.hpp"
#include "phaseforge/density.hpp"
#include "phaseforge/device.hpp"
#include "phaseforge/error.hpp"
#include "phaseforge/geometry.hpp"
#include "phaseforge/simulator.hpp"
