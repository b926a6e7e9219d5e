#pragma once

#include "tacmod/analytic/estimators.hpp"
#include "tacmod/contact/features.hpp"
#include "tacmod/core/error.hpp"
#include "tacmod/core/fit.hpp"
#include "tacmod/core/io.hpp"
#include "tacmod/core/record.hpp"
#include "tacmod/core/rng.hpp"
#include "tacmod/core/types.hpp"
#include "tacmod/hardness/shore.hpp"
#include "tacmod/learn/checkpoint.hpp"
#include "tacmod/learn/dataset.hpp"
#include "tacmod/learn/model.hpp"
#include "tacmod/learn/train.hpp"
#include "tacmod/pipeline/benchmark.hpp"
#include "tacmod/pipeline/external.hpp"
#include "tacmod/pipeline/metrics.hpp"
#include "tacmod/pipeline/pipeline.hpp"
#include "tacmod/sim/hertz.hpp"
#include "tacmod/sim/simulate.hpp"
