#pragma once

#include "bgsup/error.hpp"
#include "bgsup/framestack.hpp"
#include "bgsup/pgm.hpp"
#include "bgsup/prox.hpp"
#include "bgsup/solver.hpp"
#include "bgsup/detect.hpp"
#include "bgsup/metrics.hpp"
#include "bgsup/io.hpp"
#include "bgsup/synthetic.hpp"
