#pragma once

// Umbrella header.

#include "atpe/benchmarks.hpp"
#include "atpe/blocking.hpp"
#include "atpe/filtering.hpp"
#include "atpe/gbdt.hpp"
#include "atpe/harness.hpp"
#include "atpe/history.hpp"
#include "atpe/kmeans.hpp"
#include "atpe/params.hpp"
#include "atpe/predictor.hpp"
#include "atpe/rng.hpp"
#include "atpe/session.hpp"
#include "atpe/space.hpp"
#include "atpe/statistics.hpp"
#include "atpe/surrogate.hpp"
#include "atpe/tpe.hpp"
