#pragma once

#include "srg/errors.hpp"
#include "srg/complex_sets.hpp"
#include "srg/lti.hpp"
#include "srg/reset_system.hpp"
#include "srg/simulator.hpp"
#include "srg/analysis.hpp"
#include "srg/design.hpp"
#include "srg/io.hpp"
