#pragma once

// Fast-splitting nonadaptive group testing: the 16k-bucket scheme, its
// ck-bucket variant, and the early-stopped variant with a DD finisher,
// together with the closed-form analysis used to validate simulations.

#include "pcns/analysis.hpp"
#include "pcns/bench.hpp"
#include "pcns/core.hpp"
#include "pcns/decode.hpp"
#include "pcns/design.hpp"
#include "pcns/error.hpp"
#include "pcns/hash.hpp"
#include "pcns/outcomes.hpp"
