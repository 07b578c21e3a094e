#pragma once

#include "syncplan/core.hpp"
#include "syncplan/error.hpp"
#include "syncplan/io.hpp"
#include "syncplan/ltl/buchi.hpp"
#include "syncplan/ltl/formula.hpp"
#include "syncplan/ltl/product.hpp"
#include "syncplan/optimal_run.hpp"
#include "syncplan/pipeline.hpp"
#include "syncplan/plan_file.hpp"
#include "syncplan/rational.hpp"
#include "syncplan/simulator.hpp"
#include "syncplan/sync.hpp"
#include "syncplan/team.hpp"
