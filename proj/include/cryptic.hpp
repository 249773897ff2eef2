#pragma once

#include "cryptic/analytics.hpp"
#include "cryptic/awareness.hpp"
#include "cryptic/dataset.hpp"
#include "cryptic/error.hpp"
#include "cryptic/io.hpp"
#include "cryptic/logistic.hpp"
#include "cryptic/netinfer.hpp"
#include "cryptic/parallel.hpp"
#include "cryptic/pipeline.hpp"
#include "cryptic/regress.hpp"
#include "cryptic/rng.hpp"
#include "cryptic/simulate.hpp"
#include "cryptic/stats.hpp"
#include "cryptic/table.hpp"
#include "cryptic/time.hpp"
#include "cryptic/types.hpp"
