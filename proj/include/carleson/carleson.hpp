#pragma once

#include "carleson/criteria.hpp"
#include "carleson/errors.hpp"
#include "carleson/measure.hpp"
#include "carleson/oracle.hpp"
#include "carleson/quadrature.hpp"
#include "carleson/space.hpp"
#include "carleson/summation.hpp"
