#pragma once

#include "core.hpp"
#include "planar.hpp"
#include "sphereplate.hpp"
#include "constraints.hpp"
#include "oracle.hpp"
