#pragma once

#include "heavytail/common.hpp"
#include "heavytail/degrees.hpp"
#include "heavytail/dynamic.hpp"
#include "heavytail/graph.hpp"
#include "heavytail/levy.hpp"
#include "heavytail/metric.hpp"
#include "heavytail/rank_one.hpp"
#include "heavytail/stats.hpp"
