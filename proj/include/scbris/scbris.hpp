#pragma once

// Umbrella header for the RIS-aided MIMO-NOMA signal-cancellation simulator.

#include "scbris/analytics.hpp"
#include "scbris/beamforming.hpp"
#include "scbris/channel.hpp"
#include "scbris/config_io.hpp"
#include "scbris/csv.hpp"
#include "scbris/errors.hpp"
#include "scbris/link_metrics.hpp"
#include "scbris/montecarlo.hpp"
#include "scbris/numerics.hpp"
#include "scbris/pathloss.hpp"
#include "scbris/random.hpp"
#include "scbris/scenario.hpp"
#include "scbris/validation.hpp"
