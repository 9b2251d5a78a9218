#pragma once

#include "aot/assignment.hpp"
#include "aot/couplings.hpp"
#include "aot/distances.hpp"
#include "aot/error.hpp"
#include "aot/gauss.hpp"
#include "aot/geodesics.hpp"
#include "aot/oracle.hpp"
#include "aot/random.hpp"
