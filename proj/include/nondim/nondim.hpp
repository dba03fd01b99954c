#pragma once

#include "nondim/expr.hpp"
#include "nondim/generator.hpp"
#include "nondim/invar.hpp"
#include "nondim/linalg.hpp"
#include "nondim/odesys.hpp"
#include "nondim/poly.hpp"
#include "nondim/rational.hpp"
#include "nondim/reduce.hpp"
#include "nondim/series.hpp"
#include "nondim/symfind.hpp"
