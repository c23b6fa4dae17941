// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "amg/core/dense.hpp"
#include "amg/core/matrix_market.hpp"
#include "amg/core/sparse.hpp"
#include "amg/core/spectral.hpp"
#include "amg/core/work.hpp"

#include "amg/aggregation.hpp"
#include "amg/complexity.hpp"
#include "amg/cycle.hpp"
#include "amg/hierarchy.hpp"
#include "amg/interpolation.hpp"
#include "amg/problems.hpp"
#include "amg/relaxation.hpp"
#include "amg/strength.hpp"
#include "amg/theory.hpp"
#include "amg/verification.hpp"
