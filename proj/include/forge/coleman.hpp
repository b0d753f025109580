#pragma once

#include "forge/tower.hpp"

namespace forge {

// The trace operator L and norm operator N of the Coleman apparatus, with the
// auxiliary series k and w, the kernel generators h_n, and the splitting maps.
//
// Both operators are computed inside B = O_K[[x]][Y]/(f(Y) - f(x)): the roots
// of f(Y) - f(x) are exactly the torsion translates x + z, so the sum of
// translates is the trace of multiplication by s(Y) (power sums, division
// free) and the product is its determinant. That keeps every coefficient
// exact mod (x^n, p^M); the only precision loss is the pi^d division when
// un-composing T([pi](x)) = S(x).
class ColemanContext {
public:
    ColemanContext(const FormalGroup& G, const TowerRing& T0, int J);

    const FormalGroup& group() const { return *G_; }
    const TowerRing& tower0() const { return *T0_; }
    int J() const { return J_; }
    const PSeries& k_series() const { return k_; }
    const PSeries& w_series() const { return w_; }
    const PSeries& winv_pi() const { return winv_pi_; }

    // power sums p_n(x) = sum_z (x+z)^n for n < count, each mod x^nout
    std::vector<PSeries> power_sums(int count, int nout) const;

    // S with S([pi](x)) = sum_z s(x+z); exact for polynomial inputs
    PSeries translate_sum(const PSeries& s, int nout) const;
    // T with T([pi](x)) = S(x); coefficient d costs a division by pi^d
    PSeries uncompose_pi(const PSeries& S, int nout) const;

    PSeries trace_op(const PSeries& s, int nout) const;
    PSeries norm_op(const PSeries& s, int nout) const;

    // k (g([pi]) / w([pi])), with L(preimage(g)) = pi g
    PSeries preimage(const PSeries& g) const;
    // h_n = x^n - k L(x^n)([pi]) / (pi w([pi]))
    PSeries h_n(int n) const;
    // t(g) = g - k L(g)([pi]) / (pi w([pi])): the kernel projection
    PSeries split_t(const PSeries& g) const;
    // expansion coefficients of a kernel element over the h_n
    std::vector<OKElem> kernel_expand(const PSeries& f, int count) const;
    // projection C -> C': g - g'(0) h_1 (requires q > 2)
    PSeries split_c_prime(const PSeries& g) const;
    // mod-pi linear independence of the [pi]^m h_n family
    bool independence_check(const std::vector<std::pair<int, int>>& pairs) const;

private:
    const FormalGroup* G_;
    const TowerRing* T0_;
    int J_;
    PSeries k_, w_, winv_pi_;
    std::vector<OKElem> seed_e_; // signed elementary symmetric functions
    mutable std::mutex mu_;
    mutable std::map<int, PSeries> h_cache_;
};

// exact canonical digit expansion: the u0-adic digits of a value of O_K given
// by rational coordinates (num/den with den prime to p), continued as far as
// requested independently of the working precision
std::vector<OKElem> exact_ok_digit_expansion(const FormalGroup& G, long long num,
                                             long long den, int count);

} // namespace forge
