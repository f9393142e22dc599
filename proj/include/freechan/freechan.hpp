#pragma once

#include "freechan/channels.hpp"
#include "freechan/checkpoint.hpp"
#include "freechan/cutoffs.hpp"
#include "freechan/diagnostics.hpp"
#include "freechan/errors.hpp"
#include "freechan/field.hpp"
#include "freechan/grid.hpp"
#include "freechan/interaction.hpp"
#include "freechan/phase_space.hpp"
#include "freechan/propagators.hpp"
