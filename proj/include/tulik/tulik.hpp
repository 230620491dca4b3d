#pragma once

#include "tulik/baseline.hpp"
#include "tulik/discretize.hpp"
#include "tulik/errors.hpp"
#include "tulik/fields.hpp"
#include "tulik/grid.hpp"
#include "tulik/intensity.hpp"
#include "tulik/io.hpp"
#include "tulik/kernel.hpp"
#include "tulik/likelihood.hpp"
#include "tulik/lowrank.hpp"
#include "tulik/metrics.hpp"
#include "tulik/params.hpp"
#include "tulik/predict.hpp"
#include "tulik/presets.hpp"
#include "tulik/regularizers.hpp"
#include "tulik/rng.hpp"
#include "tulik/simulate.hpp"
#include "tulik/train.hpp"
#include "tulik/trajectory.hpp"
