#pragma once

#include "algorithms.hpp"
#include "bench.hpp"
#include "datasets.hpp"
#include "dot.hpp"
#include "exact.hpp"
#include "flowcore.hpp"
#include "generator.hpp"
#include "heuristics.hpp"
#include "io.hpp"
#include "mimo.hpp"
#include "parallel.hpp"
#include "rankorder.hpp"
