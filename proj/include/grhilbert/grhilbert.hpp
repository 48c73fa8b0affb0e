#pragma once

#include "grhilbert/errors.hpp"
#include "grhilbert/linalg.hpp"
#include "grhilbert/lingeom.hpp"
#include "grhilbert/domains.hpp"
#include "grhilbert/metric.hpp"
#include "grhilbert/symmetry.hpp"
#include "grhilbert/rescaling.hpp"
#include "grhilbert/io.hpp"

#ifndef GRHILBERT_VERSION
#define GRHILBERT_VERSION "0.3.0"
#endif
