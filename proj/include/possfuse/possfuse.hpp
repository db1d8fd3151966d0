#pragma once

#include "possfuse/assimilation.hpp"
#include "possfuse/bound_fn.hpp"
#include "possfuse/common.hpp"
#include "possfuse/constraint.hpp"
#include "possfuse/doc_io.hpp"
#include "possfuse/fusion.hpp"
#include "possfuse/point_map.hpp"
#include "possfuse/state_space.hpp"
#include "possfuse/transport.hpp"
