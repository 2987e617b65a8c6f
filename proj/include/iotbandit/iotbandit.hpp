#pragma once

#include "iotbandit/argmax.hpp"
#include "iotbandit/arm_stats.hpp"
#include "iotbandit/baselines.hpp"
#include "iotbandit/bench.hpp"
#include "iotbandit/environment.hpp"
#include "iotbandit/errors.hpp"
#include "iotbandit/metrics.hpp"
#include "iotbandit/policy.hpp"
#include "iotbandit/presets.hpp"
#include "iotbandit/random.hpp"
#include "iotbandit/simulator.hpp"
#include "iotbandit/thompson.hpp"
#include "iotbandit/ucb1.hpp"
