// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "spathom/beam_state.hpp"
#include "spathom/cli.hpp"
#include "spathom/detection.hpp"
#include "spathom/hg_modes.hpp"
#include "spathom/io.hpp"
#include "spathom/radiometry_spectrum.hpp"
#include "spathom/rng.hpp"
#include "spathom/scenario.hpp"
#include "spathom/selftest.hpp"
