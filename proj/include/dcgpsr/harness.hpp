#pragma once

// Experiment harness. Needs nlohmann/json (json.hpp) on the include path.

#include "dcgpsr/dcgpsr.hpp"
#include "dcgpsr/harness/config.hpp"
#include "dcgpsr/harness/io.hpp"
#include "dcgpsr/harness/experiment.hpp"
