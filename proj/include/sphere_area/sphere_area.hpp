#pragma once

#include "sphere_area/airy.hpp"
#include "sphere_area/errors.hpp"
#include "sphere_area/mc.hpp"
#include "sphere_area/parallel.hpp"
#include "sphere_area/profile.hpp"
#include "sphere_area/quadrature.hpp"
#include "sphere_area/random.hpp"
#include "sphere_area/report.hpp"
#include "sphere_area/sde.hpp"
#include "sphere_area/special_fn.hpp"
#include "sphere_area/stationary.hpp"
#include "sphere_area/stats.hpp"
