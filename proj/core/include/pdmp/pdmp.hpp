#pragma once

#include "pdmp/bandwidth_cv.hpp"
#include "pdmp/crack.hpp"
#include "pdmp/error.hpp"
#include "pdmp/estimators.hpp"
#include "pdmp/flow_geometry.hpp"
#include "pdmp/kernels.hpp"
#include "pdmp/model.hpp"
#include "pdmp/models.hpp"
#include "pdmp/parallel.hpp"
#include "pdmp/pipeline.hpp"
#include "pdmp/reports.hpp"
#include "pdmp/rng.hpp"
#include "pdmp/selector.hpp"
#include "pdmp/simulation.hpp"
#include "pdmp/state.hpp"
