#pragma once

#include "lscdr/bench.hpp"
#include "lscdr/bernstein.hpp"
#include "lscdr/common.hpp"
#include "lscdr/corridors.hpp"
#include "lscdr/geometry.hpp"
#include "lscdr/mapp.hpp"
#include "lscdr/network.hpp"
#include "lscdr/optimize.hpp"
#include "lscdr/qp.hpp"
#include "lscdr/scenario_io.hpp"
#include "lscdr/sim.hpp"
#include "lscdr/world.hpp"
