#pragma once

#include "railscale/characterization.hpp"
#include "railscale/config.hpp"
#include "railscale/error.hpp"
#include "railscale/optimizer.hpp"
#include "railscale/pll.hpp"
#include "railscale/predictor.hpp"
#include "railscale/simulator.hpp"
#include "railscale/sweep.hpp"
#include "railscale/timing_power.hpp"
#include "railscale/workload.hpp"
