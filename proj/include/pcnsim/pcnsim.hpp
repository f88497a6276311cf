#pragma once

#include "pcnsim/capacity_planner.hpp"
#include "pcnsim/chain_analytics.hpp"
#include "pcnsim/channel_graph.hpp"
#include "pcnsim/commands.hpp"
#include "pcnsim/outcome.hpp"
#include "pcnsim/path_engine.hpp"
#include "pcnsim/recipe.hpp"
#include "pcnsim/results_io.hpp"
#include "pcnsim/rng.hpp"
#include "pcnsim/sim_core.hpp"
#include "pcnsim/snapshot.hpp"
