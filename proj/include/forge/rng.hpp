#pragma once

#include <random>

#include "forge/pseries.hpp"

namespace forge {

// deterministic sampling: the same seed gives the same bytes everywhere
using Rng = std::mt19937_64;

OKElem rand_ok(const OKRing& R, Rng& rng);
OKElem rand_ok_unit(const OKRing& R, Rng& rng);
// random series with coefficients scaled by pi^pimul, optionally zero
// constant term
PSeries rand_series(const Ring& A, int n, Rng& rng, int pimul = 0, bool zero_const = false);

} // namespace forge
