#pragma once

#include "eel/chisq.hpp"
#include "eel/estimator.hpp"
#include "eel/extended.hpp"
#include "eel/inference.hpp"
#include "eel/io.hpp"
#include "eel/model.hpp"
#include "eel/oel.hpp"
#include "eel/rng.hpp"
#include "eel/simulation.hpp"
#include "eel/types.hpp"
