#pragma once

#include "gnbfit/errors.hpp"
#include "gnbfit/numerics.hpp"
#include "gnbfit/distributions.hpp"
#include "gnbfit/sampling.hpp"
#include "gnbfit/histogram.hpp"
#include "gnbfit/objectives.hpp"
#include "gnbfit/optimizer.hpp"
#include "gnbfit/fitting.hpp"
