#pragma once

#include "errors.hpp"
#include "rational.hpp"
#include "matrix.hpp"
#include "spectral.hpp"
#include "graph_of_groups.hpp"
#include "bass_serre.hpp"
#include "subgroup_analysis.hpp"
#include "psl2z.hpp"
#include "orbit_reduce.hpp"
#include "trichotomy.hpp"
#include "linf_cohomology.hpp"
#include "bundle_lab.hpp"
#include "drift.hpp"
#include "io.hpp"
