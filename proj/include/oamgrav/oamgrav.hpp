#pragma once

#include "oamgrav/beam_optics.hpp"
#include "oamgrav/coupling.hpp"
#include "oamgrav/csv.hpp"
#include "oamgrav/density_matrix.hpp"
#include "oamgrav/entanglement_metrics.hpp"
#include "oamgrav/errors.hpp"
#include "oamgrav/evolution.hpp"
#include "oamgrav/fluctuation_field.hpp"
#include "oamgrav/jacobi_eigen.hpp"
#include "oamgrav/quadrature.hpp"
#include "oamgrav/taylor_series.hpp"
