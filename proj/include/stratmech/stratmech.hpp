#pragma once

#include "stratmech/core.hpp"
#include "stratmech/distributions.hpp"
#include "stratmech/io.hpp"
#include "stratmech/learning.hpp"
#include "stratmech/linear_design.hpp"
#include "stratmech/metrics.hpp"
#include "stratmech/threshold_design.hpp"
