#pragma once

#include "textline/core.hpp"
#include "textline/io.hpp"
#include "textline/energy.hpp"
#include "textline/maxflow.hpp"
#include "textline/delaunay.hpp"
#include "textline/proposals.hpp"
#include "textline/fusion.hpp"
#include "textline/refit.hpp"
#include "textline/pearl.hpp"
#include "textline/imaging.hpp"
#include "textline/classify.hpp"
#include "textline/synth.hpp"
#include "textline/evaluation.hpp"
#include "textline/config.hpp"
