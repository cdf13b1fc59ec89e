#pragma once

#include "wcs/errors.hpp"
#include "wcs/core_dist.hpp"
#include "wcs/uncertainty.hpp"
#include "wcs/rcvar.hpp"
#include "wcs/wasserstein.hpp"
#include "wcs/bayes.hpp"
#include "wcs/dro.hpp"
#include "wcs/models.hpp"
#include "wcs/bounds.hpp"
#include "wcs/csv.hpp"
#include "wcs/report.hpp"
#include "wcs/experiments.hpp"
