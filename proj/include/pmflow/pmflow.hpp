#pragma once

// Prandtl-Meyer reflection toolkit for self-similar potential flow past a
// solid ramp: uniform shock states, shock polar analysis, admissible
// parameter regions, and the free-boundary solver for the curved transonic
// shock, with a post-hoc verification suite.

#include "pmflow/elliptic.hpp"
#include "pmflow/elling_liu.hpp"
#include "pmflow/errors.hpp"
#include "pmflow/gas.hpp"
#include "pmflow/geometry.hpp"
#include "pmflow/io.hpp"
#include "pmflow/mapping.hpp"
#include "pmflow/roots.hpp"
#include "pmflow/shock_curve.hpp"
#include "pmflow/shock_polar.hpp"
#include "pmflow/solver.hpp"
#include "pmflow/solver_config.hpp"
#include "pmflow/uniform_state.hpp"
#include "pmflow/verify.hpp"
