// Convenience include for the whole library.
#pragma once

#include "nfer/analysis.hpp"
#include "nfer/cli.hpp"
#include "nfer/core.hpp"
#include "nfer/engine.hpp"
#include "nfer/expr.hpp"
#include "nfer/parser.hpp"
#include "nfer/reductions.hpp"
#include "nfer/rules.hpp"
#include "nfer/trace_io.hpp"
