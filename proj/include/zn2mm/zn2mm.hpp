#pragma once

// Umbrella header.
#include "error.hpp"
#include "scalar.hpp"
#include "polynomial.hpp"
#include "matrix.hpp"
#include "partitions.hpp"
#include "schur.hpp"
#include "littlewood_richardson.hpp"
#include "fermion.hpp"
#include "quadrature.hpp"
#include "measures.hpp"
#include "engines.hpp"
#include "verify.hpp"
#include "io.hpp"
