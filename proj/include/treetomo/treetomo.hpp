#pragma once

#include "treetomo/error.hpp"
#include "treetomo/estimation.hpp"
#include "treetomo/hitting.hpp"
#include "treetomo/io.hpp"
#include "treetomo/kernel.hpp"
#include "treetomo/random.hpp"
#include "treetomo/scalar.hpp"
#include "treetomo/tomography.hpp"
#include "treetomo/tree.hpp"
