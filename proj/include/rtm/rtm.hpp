#pragma once

#include "rtm/errors.hpp"
#include "rtm/model.hpp"
#include "rtm/sample.hpp"
#include "rtm/simulate.hpp"
#include "rtm/estimators.hpp"
#include "rtm/parallel.hpp"
#include "rtm/inference.hpp"
#include "rtm/experiments.hpp"
