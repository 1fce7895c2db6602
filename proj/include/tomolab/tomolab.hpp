#pragma once

// Umbrella header for the library modules.

#include "tomolab/kernel.hpp"
#include "tomolab/special.hpp"
#include "tomolab/quadrature.hpp"
#include "tomolab/state.hpp"
#include "tomolab/classical.hpp"
#include "tomolab/quantum.hpp"
#include "tomolab/inverse.hpp"
#include "tomolab/limits.hpp"
#include "tomolab/io.hpp"
#include "tomolab/selftest.hpp"
