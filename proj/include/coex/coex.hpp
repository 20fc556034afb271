#pragma once

// Umbrella header for the co-existence pricing engine: a congestible
// cellular network (negative externality) priced alongside a crowdsourced
// WiFi add-on network (positive externality), solved as a two-stage game.

#include "coex/benchmark.hpp"
#include "coex/config.hpp"
#include "coex/csv.hpp"
#include "coex/distributions.hpp"
#include "coex/figures.hpp"
#include "coex/market.hpp"
#include "coex/oracle.hpp"
#include "coex/propositions.hpp"
#include "coex/roots.hpp"
#include "coex/stage1.hpp"
#include "coex/stage2.hpp"
#include "coex/sweep.hpp"
#include "coex/verify.hpp"
