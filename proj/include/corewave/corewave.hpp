#pragma once

#include "corewave/config.hpp"
#include "corewave/critical_values.hpp"
#include "corewave/csv.hpp"
#include "corewave/econometrics.hpp"
#include "corewave/error.hpp"
#include "corewave/estimators.hpp"
#include "corewave/pipeline.hpp"
#include "corewave/random.hpp"
#include "corewave/selection.hpp"
#include "corewave/series.hpp"
#include "corewave/stats.hpp"
#include "corewave/wavelet.hpp"
