#pragma once

#include "plagg/core.hpp"
#include "plagg/model.hpp"
#include "plagg/kernel.hpp"
#include "plagg/objective.hpp"
#include "plagg/solver.hpp"
#include "plagg/baselines.hpp"
#include "plagg/simulate.hpp"
#include "plagg/evaluate.hpp"
#include "plagg/io.hpp"
