#pragma once

#include "constants.hpp"
#include "error.hpp"
#include "game.hpp"
#include "io.hpp"
#include "numeric.hpp"
#include "potentials.hpp"
#include "ratio.hpp"
#include "subset.hpp"
#include "verify.hpp"
