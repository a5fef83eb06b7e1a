#pragma once

#include "synclab/analysis.hpp"
#include "synclab/arm.hpp"
#include "synclab/controller.hpp"
#include "synclab/errors.hpp"
#include "synclab/graph.hpp"
#include "synclab/io.hpp"
#include "synclab/leader.hpp"
#include "synclab/observer.hpp"
#include "synclab/scenario.hpp"
#include "synclab/sim.hpp"
