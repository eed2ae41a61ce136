#pragma once

#include "rleceo/checkpoint.hpp"
#include "rleceo/config.hpp"
#include "rleceo/cop.hpp"
#include "rleceo/dqn.hpp"
#include "rleceo/env.hpp"
#include "rleceo/error.hpp"
#include "rleceo/features.hpp"
#include "rleceo/harness.hpp"
#include "rleceo/lshade.hpp"
#include "rleceo/network.hpp"
#include "rleceo/problems.hpp"
#include "rleceo/random.hpp"
