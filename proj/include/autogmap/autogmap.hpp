#pragma once

#include "autogmap/agent.hpp"
#include "autogmap/baselines.hpp"
#include "autogmap/crossbar.hpp"
#include "autogmap/error.hpp"
#include "autogmap/evaluator.hpp"
#include "autogmap/matrix.hpp"
#include "autogmap/random.hpp"
#include "autogmap/render.hpp"
#include "autogmap/reorder.hpp"
#include "autogmap/scheme.hpp"
#include "autogmap/trainer.hpp"
