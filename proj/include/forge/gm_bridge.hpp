#pragma once

#include "forge/coleman.hpp"

namespace forge {

// The multiplicative-law side: Z_p exponents on principal unit series,
// phi_Gm(f) = [q]_Gm(f) -_Gm f([pi]_F), and the injection of norm-compatible
// unit series into the kernel of the trace operator.

// (1 + g)^alpha - 1 for alpha in Z_p (an O_K scalar with Z_p meaning),
// stabilized binomial expansion; requires val(g(0)) >= 1
PSeries gm_endo(const OKRing& R, const OKElem& alpha, const PSeries& g, int n);
// log(1 + g) for pi-divisible g
PSeries gm_log(const OKRing& R, const PSeries& g, int n);
// log(1 + g) with K-coefficients for x-divisible g
KSeries gm_log_k(const OKRing& R, const PSeries& g, int n);
// multiplicative difference (1+a)/(1+b) - 1
PSeries gm_ominus(const PSeries& a, const PSeries& b, int n);

// [q]_Gm(f(x)) -_Gm f([pi]_F(x)); divisible by pi by the Frobenius congruence
PSeries phi_gm(const FormalGroup& Gf, const PSeries& f, int n);

// smallest r with [p^r]_Gm(pi x) in p O_K[[x]], checked directly; bounded by
// the least r with p | pi^r (which is 1 for pi = u p)
int min_r(const OKRing& R);

// is 1 + g a fixed point of the norm operator
bool norm_compatible(const ColemanContext& C, const PSeries& g, int nout);

// s = log_Gm([p^r] phi_Gm(g)) for a norm-compatible 1 + g: lands in the
// kernel of the trace operator, divisible by p; to_cprime >= 2 multiplies by
// ([pi](x))^to_cprime to land in C'
PSeries inject_to_kernel(const ColemanContext& C, const PSeries& g, int n,
                         int to_cprime = 0);

// valuations of q - pi^{d+1} for d < N (all finite when pi^n != q for all n):
// the leading-term recursion certifying injectivity of phi_Gm
std::vector<int> injectivity_certificate(const OKRing& R, int N);

} // namespace forge
