#pragma once

// Umbrella header: the full discrete-abstraction engine.
//
// A continuous plant under piecewise-constant control is abstracted into a
// finite automaton: hypersurfaces partition the state space into cells,
// trajectory crossings of those surfaces become timestamped events and
// symbols, and sampled simulation assembles the nondeterministic transition
// relation, which can then be checked for observability and replayed from
// symbol strings.

#include "desplant/errors.hpp"
#include "desplant/numeric.hpp"
#include "desplant/partition.hpp"
#include "desplant/plant.hpp"
#include "desplant/event_engine.hpp"
#include "desplant/system.hpp"
#include "desplant/abstraction.hpp"
#include "desplant/io.hpp"
#include "desplant/cli.hpp"
