#pragma once

#include "forge/ring.hpp"

namespace forge {

// Truncated polynomial products over a coefficient ring, the inner loop of
// nearly everything here. Three paths:
//   - schoolbook, single thread: the reference implementation
//   - schoolbook with OpenMP over output coefficients
//   - Karatsuba (serial)
// All paths are bit-identical: the arithmetic is exact modular arithmetic,
// so reassociation cannot change results. poly_mul_trunc picks a path from
// the operand sizes; FORGE_SERIAL=1 forces the reference path everywhere.

enum class MulPath { Auto, Serial, Omp, Karatsuba };

// out (nout blocks) = (a * b) truncated to nout coefficients; out must not
// alias a or b.
void poly_mul_trunc(const Ring& R, const Zp* a, int na, const Zp* b, int nb,
                    Zp* out, int nout, MulPath path = MulPath::Auto);

bool kernels_force_serial();

// number of block-multiplications the schoolbook path would perform
long long poly_mul_cost(int na, int nb, int nout);

} // namespace forge
