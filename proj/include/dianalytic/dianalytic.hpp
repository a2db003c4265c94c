#pragma once

#include "dianalytic/sphere.hpp"
#include "dianalytic/polynomial.hpp"
#include "dianalytic/maps.hpp"
#include "dianalytic/dynamics.hpp"
#include "dianalytic/catalog.hpp"
#include "dianalytic/cloud.hpp"
#include "dianalytic/herman.hpp"
#include "dianalytic/parallel.hpp"
#include "dianalytic/image.hpp"
#include "dianalytic/render.hpp"
#include "dianalytic/paramspace.hpp"
