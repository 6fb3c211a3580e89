#pragma once

// umbrella header

#include "hiergp/adaptive.hpp"
#include "hiergp/baselines.hpp"
#include "hiergp/basis.hpp"
#include "hiergp/bench.hpp"
#include "hiergp/dynamics.hpp"
#include "hiergp/errors.hpp"
#include "hiergp/gibbs.hpp"
#include "hiergp/horseshoe.hpp"
#include "hiergp/model.hpp"
#include "hiergp/predict.hpp"
#include "hiergp/rng.hpp"
#include "hiergp/serialize.hpp"
#include "hiergp/testfns.hpp"
