#pragma once

#include "dupinlab/classifier.hpp"
#include "dupinlab/error.hpp"
#include "dupinlab/exprdsl.hpp"
#include "dupinlab/families.hpp"
#include "dupinlab/immersion.hpp"
#include "dupinlab/isotensor.hpp"
#include "dupinlab/jet.hpp"
#include "dupinlab/laguerre.hpp"
#include "dupinlab/linalg.hpp"
#include "dupinlab/minkowski.hpp"
#include "dupinlab/moebius.hpp"
#include "dupinlab/surface.hpp"
