#pragma once

#include "uavpower/energy.hpp"
#include "uavpower/errors.hpp"
#include "uavpower/fitting.hpp"
#include "uavpower/flight_log.hpp"
#include "uavpower/manifest.hpp"
#include "uavpower/mlp.hpp"
#include "uavpower/optimal_speed.hpp"
#include "uavpower/power_model.hpp"
#include "uavpower/preprocess.hpp"
#include "uavpower/synth.hpp"
