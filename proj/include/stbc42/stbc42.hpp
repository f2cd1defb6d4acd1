#pragma once

// Umbrella header: the full 4x2 space-time block code toolkit.

#include "stbc42/analysis.hpp"
#include "stbc42/channel.hpp"
#include "stbc42/code.hpp"
#include "stbc42/constellation.hpp"
#include "stbc42/decoder.hpp"
#include "stbc42/errors.hpp"
#include "stbc42/linalg.hpp"
#include "stbc42/rng.hpp"
#include "stbc42/sim.hpp"
