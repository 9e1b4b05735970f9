#pragma once

#include "cir/controller.hpp"
#include "cir/errors.hpp"
#include "cir/estimator.hpp"
#include "cir/lqg.hpp"
#include "cir/matcore.hpp"
#include "cir/model.hpp"
#include "cir/reconstructor.hpp"
#include "cir/reference.hpp"
#include "cir/sim.hpp"
#include "cir/squaring.hpp"
#include "cir/systems.hpp"
