#pragma once

#include "fictplay/dynamics.hpp"
#include "fictplay/equilibrium.hpp"
#include "fictplay/game.hpp"
#include "fictplay/play.hpp"
#include "fictplay/presets.hpp"
#include "fictplay/svg.hpp"
#include "fictplay/trace_io.hpp"
