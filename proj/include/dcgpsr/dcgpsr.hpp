#pragma once

#include "dcgpsr/errors.hpp"
#include "dcgpsr/random.hpp"
#include "dcgpsr/channel_model.hpp"
#include "dcgpsr/sensing.hpp"
#include "dcgpsr/sparsity.hpp"
#include "dcgpsr/metrics.hpp"
#include "dcgpsr/problem.hpp"
#include "dcgpsr/bcqp.hpp"
#include "dcgpsr/dc_gpsr.hpp"
#include "dcgpsr/proximal.hpp"
#include "dcgpsr/omp.hpp"
