#ifndef SPAR_SPAR_HPP
#define SPAR_SPAR_HPP

#include "spar/errors.hpp"
#include "spar/matrixio.hpp"
#include "spar/spectral.hpp"
#include "spar/statfun.hpp"
#include "spar/riskmodel.hpp"
#include "spar/adapt.hpp"
#include "spar/report_io.hpp"
#include "spar/rng.hpp"
#include "spar/synthetic.hpp"
#include "spar/verify.hpp"

#endif  // SPAR_SPAR_HPP
