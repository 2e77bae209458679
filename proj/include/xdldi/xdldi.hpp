#pragma once

// Umbrella header: the whole library.

#include "signed_log.hpp"   // sign/log numerics for extreme moment orders
#include "rng.hpp"          // pinned deterministic random draws
#include "series.hpp"       // return series, panels, error taxonomy
#include "dates.hpp"        // ISO calendar helpers
#include "moments.hpp"      // central/cross moments, XD, VaR/CVaR
#include "liability.hpp"    // cashflow discounting on dated zero curves
#include "stats.hpp"        // component/liability summary statistics
#include "ica.hpp"          // whitening and FastICA decomposition
#include "allocation.hpp"   // 2k-moment weights, hurdles, objective
#include "options.hpp"      // Black-Scholes, implied vol, option weights
#include "io.hpp"           // CSV schemas, config, synthetic scenarios
#include "backtest.hpp"     // walk-forward LDI and option-hedge backtests
