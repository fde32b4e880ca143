#ifndef NAHM_NAHM_HPP
#define NAHM_NAHM_HPP

#include "nahm/degeneracy.hpp"
#include "nahm/elliptic.hpp"
#include "nahm/errors.hpp"
#include "nahm/flow.hpp"
#include "nahm/grid.hpp"
#include "nahm/liealg.hpp"
#include "nahm/positive.hpp"
#include "nahm/spectral.hpp"
#include "nahm/stability.hpp"

#endif  // NAHM_NAHM_HPP
