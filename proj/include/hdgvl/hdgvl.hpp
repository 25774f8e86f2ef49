#pragma once

#include "hdgvl/basis.hpp"
#include "hdgvl/errors.hpp"
#include "hdgvl/hybrid_system.hpp"
#include "hdgvl/linalg.hpp"
#include "hdgvl/local_solver.hpp"
#include "hdgvl/mesh.hpp"
#include "hdgvl/pipeline.hpp"
#include "hdgvl/quadrature.hpp"
#include "hdgvl/study.hpp"
#include "hdgvl/types.hpp"
#include "hdgvl/verify.hpp"
