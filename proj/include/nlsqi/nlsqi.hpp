// nlsqi: spectral and Monte Carlo tools for the truncated quintic NLS on the torus.
//
// Umbrella header.

#ifndef NLSQI_NLSQI_HPP
#define NLSQI_NLSQI_HPP

#include "nlsqi/errors.hpp"
#include "nlsqi/flow.hpp"
#include "nlsqi/measures.hpp"
#include "nlsqi/modified_energy.hpp"
#include "nlsqi/report.hpp"
#include "nlsqi/resonance.hpp"
#include "nlsqi/rng.hpp"
#include "nlsqi/spectral.hpp"
#include "nlsqi/state.hpp"
#include "nlsqi/transport.hpp"

#endif  // NLSQI_NLSQI_HPP
