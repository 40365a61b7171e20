#pragma once

#include "dbnot/constraints.hpp"
#include "dbnot/entropic.hpp"
#include "dbnot/eval.hpp"
#include "dbnot/graph.hpp"
#include "dbnot/io.hpp"
#include "dbnot/linalg.hpp"
#include "dbnot/mincut.hpp"
#include "dbnot/objective.hpp"
#include "dbnot/pipeline.hpp"
#include "dbnot/rng.hpp"
#include "dbnot/solver.hpp"
