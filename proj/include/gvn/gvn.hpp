#pragma once

// Umbrella header.

#include "gvn/analysis.hpp"
#include "gvn/errors.hpp"
#include "gvn/ir.hpp"
#include "gvn/oracle.hpp"
#include "gvn/pool.hpp"
#include "gvn/redundancy.hpp"
