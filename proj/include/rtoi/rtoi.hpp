#pragma once

// Every library header except cli/, whose manifest code needs libcrypto.
#include "rtoi/aggregate/aggregate.hpp"
#include "rtoi/classify/classify.hpp"
#include "rtoi/core/csv.hpp"
#include "rtoi/core/date.hpp"
#include "rtoi/core/error.hpp"
#include "rtoi/core/parallel.hpp"
#include "rtoi/core/price.hpp"
#include "rtoi/econ/fama_macbeth.hpp"
#include "rtoi/econ/hac.hpp"
#include "rtoi/econ/magnitude.hpp"
#include "rtoi/econ/ols.hpp"
#include "rtoi/mdio/calendar.hpp"
#include "rtoi/mdio/parse.hpp"
#include "rtoi/mdio/records.hpp"
#include "rtoi/mdio/universe.hpp"
#include "rtoi/panel/panel.hpp"
#include "rtoi/studies/eventstudy.hpp"
#include "rtoi/studies/longshort.hpp"
#include "rtoi/studies/regressions.hpp"
#include "rtoi/studies/spec.hpp"
#include "rtoi/studies/tables.hpp"
#include "rtoi/synth/market.hpp"
#include "rtoi/synth/oracles.hpp"
#include "rtoi/synth/panel_gen.hpp"
#include "rtoi/synth/rng.hpp"
