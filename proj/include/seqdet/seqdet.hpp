#pragma once

#include "seqdet/errors.hpp"
#include "seqdet/gauss.hpp"
#include "seqdet/info.hpp"
#include "seqdet/mc.hpp"
#include "seqdet/optimize.hpp"
#include "seqdet/posterior.hpp"
#include "seqdet/quantizer.hpp"
#include "seqdet/rng.hpp"
#include "seqdet/sequential.hpp"
