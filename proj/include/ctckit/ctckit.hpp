#pragma once

#include "ctckit/errors.hpp"
#include "ctckit/core.hpp"
#include "ctckit/hermitian_basis.hpp"
#include "ctckit/deutsch_map.hpp"
#include "ctckit/selection.hpp"
#include "ctckit/rng.hpp"
#include "ctckit/discontinuity.hpp"
#include "ctckit/json_io.hpp"
#include "ctckit/census.hpp"
#include "ctckit/bloch_slice.hpp"
#include "ctckit/scenario.hpp"
#include "ctckit/log.hpp"
