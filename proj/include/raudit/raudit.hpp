#pragma once

// Umbrella header. http_backend.hpp and factory.hpp are opt-in includes
// since they pull in the HTTP client implementation.

#include "raudit/backends.hpp"
#include "raudit/config.hpp"
#include "raudit/controller.hpp"
#include "raudit/domain.hpp"
#include "raudit/engine.hpp"
#include "raudit/metrics.hpp"
#include "raudit/metrics_io.hpp"
#include "raudit/rng.hpp"
#include "raudit/run_log.hpp"
#include "raudit/sensors.hpp"
#include "raudit/wire.hpp"
