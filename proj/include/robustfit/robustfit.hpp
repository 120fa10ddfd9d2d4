#pragma once

#include "robustfit/baselines.hpp"
#include "robustfit/diagnostics.hpp"
#include "robustfit/error.hpp"
#include "robustfit/experiment.hpp"
#include "robustfit/linalg.hpp"
#include "robustfit/loadcast.hpp"
#include "robustfit/random.hpp"
#include "robustfit/sarm.hpp"
#include "robustfit/simgen.hpp"
#include "robustfit/tssarm.hpp"
