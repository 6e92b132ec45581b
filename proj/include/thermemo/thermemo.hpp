#pragma once

#include "thermemo/convolution.hpp"
#include "thermemo/error.hpp"
#include "thermemo/experiment.hpp"
#include "thermemo/feedback.hpp"
#include "thermemo/forward_solver.hpp"
#include "thermemo/functions.hpp"
#include "thermemo/grid.hpp"
#include "thermemo/hysteresis.hpp"
#include "thermemo/inverse_solver.hpp"
#include "thermemo/io.hpp"
#include "thermemo/pde_ops.hpp"
#include "thermemo/report.hpp"
#include "thermemo/scenario.hpp"
#include "thermemo/verify.hpp"
