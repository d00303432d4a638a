#pragma once

#include "gpsm/channel.hpp"
#include "gpsm/detector.hpp"
#include "gpsm/errors.hpp"
#include "gpsm/modem.hpp"
#include "gpsm/montecarlo.hpp"
#include "gpsm/notification.hpp"
#include "gpsm/pattern_space.hpp"
#include "gpsm/precoding.hpp"
#include "gpsm/presets.hpp"
#include "gpsm/results_io.hpp"
#include "gpsm/rng.hpp"
#include "gpsm/run_config.hpp"
#include "gpsm/version.hpp"
