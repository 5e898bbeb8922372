#pragma once

#include "pairprox/applications.hpp"
#include "pairprox/bench.hpp"
#include "pairprox/error.hpp"
#include "pairprox/instances.hpp"
#include "pairprox/linalg.hpp"
#include "pairprox/matrix_io.hpp"
#include "pairprox/operator_json.hpp"
#include "pairprox/operators.hpp"
#include "pairprox/random.hpp"
#include "pairprox/resolvents.hpp"
#include "pairprox/solvers.hpp"
#include "pairprox/trace_csv.hpp"
