#pragma once

#include "forge/coleman.hpp"

namespace forge {

// The interpolation-module machinery: the module A of series whose torsion
// values form trace-compatible sequences, the map phi(f) = [pi](f) - f([pi])
// (formal-group difference), its coefficient-recursion inverse, and the
// lambda-splitting of the exact sequence 0 -> End(F) -> A -> C' -> 0.

enum class ModuleTag { A, C, CPrime, D, EndF };

struct Membership {
    bool ok = false;
    PSeries residual; // in log coordinates for A and D
};

// membership at working precision; A and D also verify the constant-term
// relation through the level-0 tower (the logarithm is blind to torsion
// constants, so that part is checked directly)
Membership check_membership(const ColemanContext& C, ModuleTag tag, const PSeries& f,
                            int nout);

// [pi](f(x)) - f([pi](x)) under the group law; asserts pi | phi(f), and a
// trivial linear term when f'(0) = 0
PSeries phi(const FormalGroup& G, const PSeries& f, int n);

// solve [pi](f) - f([pi]) = g for pi | g with g'(0) = 0; the canonical
// solution takes f(0) = [1/(pi-1)](g(0)) and a_1 = 0, and each higher
// coefficient costs one exact division by pi(1 + pi z)
PSeries solve_phi(const FormalGroup& G, const PSeries& g, int n);

// the unique lambda with trivial linear term in f - [lambda]
OKElem lambda_of(const FormalGroup& G, const PSeries& f);

// log_F(phi(f)): the map A -> C' of the split exact sequence
PSeries a_to_cprime(const ColemanContext& C, const PSeries& f, int n);
// section C' -> A: solve_phi(exp_F(c))
PSeries cprime_to_a(const ColemanContext& C, const PSeries& c, int n);
// the isomorphism D -> C of Lemma-type: h -> log_F(h)
PSeries log_D_to_C(const ColemanContext& C, const PSeries& h, int n);

} // namespace forge
