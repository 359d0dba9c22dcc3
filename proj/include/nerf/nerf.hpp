#pragma once

#include "nerf/bounds.hpp"
#include "nerf/combinatorics.hpp"
#include "nerf/epsnet.hpp"
#include "nerf/error.hpp"
#include "nerf/frames.hpp"
#include "nerf/oracle.hpp"
#include "nerf/parallel.hpp"
#include "nerf/report.hpp"
#include "nerf/signed_permutation.hpp"

namespace nerf {
inline constexpr const char* version = "0.1.0";
}
