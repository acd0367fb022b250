#pragma once

#include "sslasso/common.hpp"
#include "sslasso/config.hpp"
#include "sslasso/dataset.hpp"
#include "sslasso/estimators.hpp"
#include "sslasso/experiment.hpp"
#include "sslasso/geometry.hpp"
#include "sslasso/model.hpp"
#include "sslasso/report_io.hpp"
#include "sslasso/rng.hpp"
#include "sslasso/solver.hpp"
#include "sslasso/tuning.hpp"
