#pragma once

#include "ags.hpp"
#include "algebra.hpp"
#include "alias.hpp"
#include "buildup.hpp"
#include "count.hpp"
#include "estimate.hpp"
#include "graph.hpp"
#include "graphlet.hpp"
#include "oracle.hpp"
#include "profile.hpp"
#include "rng.hpp"
#include "sampler.hpp"
#include "table.hpp"
#include "treelet.hpp"
#include "uniform.hpp"
#include "vlc.hpp"
