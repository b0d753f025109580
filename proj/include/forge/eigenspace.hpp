#pragma once

#include "forge/coleman.hpp"

namespace forge {

// The q/pi-eigenspace machinery of the trace operator: T = L - (q/pi),
// eigenvector construction under pi^3 | q, the rho isomorphism between the
// lambda-eigenspace and the kernel, the divisible-eigenproblem solver, the
// finite-level interpolation pipeline, and the non-interpolable sequence.
class EigenContext {
public:
    EigenContext(const ColemanContext& C);

    const ColemanContext& coleman() const { return *C_; }
    const FormalGroup& group() const { return C_->group(); }
    const OKElem& lambda() const { return lambda_; } // q/pi
    bool pi3_divides_q() const { return pi3_; }
    void require_pi3() const {
        if (!pi3_) throw Pi3NotDividingQ("construction requires pi^3 | q");
    }

    // L(f) - (q/pi) f
    PSeries T_op(const PSeries& f, int nout) const;
    // f = sum pi^i f_i with L(f_{i+1}) = (q/pi^2) f_i, starting from a kernel
    // element f_0 not divisible by pi; T(partial sum) = -(q/pi) pi^s f_s
    PSeries build_eigenvector(const PSeries& f0, int steps) const;
    // rho_lambda(f) = f - lambda k f([pi]) / (pi w([pi])), lambda in pi O_K
    PSeries rho(const PSeries& f, const OKElem& lambda) const;
    PSeries rho(const PSeries& f) const { return rho(f, lambda_); }
    // the x-adically convergent inverse: g with rho(g) = h for h in ker L;
    // gains q-1 degrees per step
    PSeries rho_inverse(const PSeries& h, const OKElem& lambda, int* steps = nullptr) const;
    PSeries rho_inverse(const PSeries& h, int* steps = nullptr) const {
        return rho_inverse(h, lambda_, steps);
    }
    // h divisible by [pi^{n+1}] with T(h) = [pi^n] j, for pi | j
    PSeries solve_eigen_divisible(const PSeries& j, int n, int steps) const;

    // exact division of S by the iterate series [pi^k]
    PSeries div_pi_iterate(const PSeries& S, int k) const;

private:
    const ColemanContext* C_;
    OKElem lambda_;
    bool pi3_ = false;
};

struct Prop312Result {
    int l = 0;        // the minimal exponent; the interpolated entry is [pi^{l+1}](z)
    PSeries f1;       // T(f1) = 0 and f1(u_n) = pi^l log(z)
    PSeries fstar;    // exp_F(pi f1), the interpolating series
};

// finite-level pipeline for a point z in the maximal ideal of K_n (n <= 1)
Prop312Result prop312_pipeline(const EigenContext& ec,
                               const std::vector<const TowerRing*>& towers,
                               const Val& z, int n);

struct Counterexample {
    Val a0, a1;     // the additive chain: Tr(a1) = (q/pi) a0
    Val z;          // trace preimage of pi used for the step
    int val_a0 = 0; // lattice valuations, for the decay certificate
    int val_a1 = 0;
};

// the decaying trace-compatible prefix that no series can interpolate
Counterexample build_counterexample(const EigenContext& ec, const TowerRing& T1,
                                    int eps_valuation);

} // namespace forge
