#ifndef RIPE_RIPE_HPP
#define RIPE_RIPE_HPP

#include "ripe/bit_vector.hpp"
#include "ripe/core.hpp"
#include "ripe/discretize.hpp"
#include "ripe/experiment.hpp"
#include "ripe/generate.hpp"
#include "ripe/io.hpp"
#include "ripe/predict.hpp"
#include "ripe/select.hpp"
#include "ripe/significance.hpp"

#endif  // RIPE_RIPE_HPP
