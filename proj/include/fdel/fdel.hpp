#pragma once

#include "fdel/distributions.hpp"
#include "fdel/elcore.hpp"
#include "fdel/error.hpp"
#include "fdel/estimating.hpp"
#include "fdel/inference.hpp"
#include "fdel/io.hpp"
#include "fdel/json.hpp"
#include "fdel/model_spec.hpp"
#include "fdel/models.hpp"
#include "fdel/montecarlo.hpp"
#include "fdel/optimize.hpp"
#include "fdel/spectral.hpp"
