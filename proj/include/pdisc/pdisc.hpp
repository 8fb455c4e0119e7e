#pragma once

#include "pdisc/core.hpp"
#include "pdisc/calendar.hpp"
#include "pdisc/events.hpp"
#include "pdisc/market_data.hpp"
#include "pdisc/econ/ols.hpp"
#include "pdisc/econ/johansen.hpp"
#include "pdisc/econ/vecm.hpp"
#include "pdisc/econ/newey_west.hpp"
#include "pdisc/discovery.hpp"
#include "pdisc/synthetic.hpp"
#include "pdisc/scenario.hpp"
#include "pdisc/determinants.hpp"
#include "pdisc/config.hpp"
#include "pdisc/io.hpp"
