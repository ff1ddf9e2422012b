#pragma once

#include "mfh/analysis.hpp"
#include "mfh/assignment.hpp"
#include "mfh/errors.hpp"
#include "mfh/gallery.hpp"
#include "mfh/meanfield.hpp"
#include "mfh/measure.hpp"
#include "mfh/model.hpp"
#include "mfh/noise.hpp"
#include "mfh/parallel.hpp"
#include "mfh/segments.hpp"
#include "mfh/solver.hpp"
