#ifndef PHASERET_PHASERET_HPP
#define PHASERET_PHASERET_HPP

#include "phaseret/types.hpp"
#include "phaseret/operators.hpp"
#include "phaseret/eigensolve.hpp"
#include "phaseret/initializers.hpp"
#include "phaseret/gradient_engine.hpp"
#include "phaseret/solvers.hpp"
#include "phaseret/metrics.hpp"
#include "phaseret/file_util.hpp"
#include "phaseret/benchmark.hpp"
#include "phaseret/datasets_io.hpp"

#endif  // PHASERET_PHASERET_HPP
