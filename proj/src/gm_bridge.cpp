#include "forge/gm_bridge.hpp"

namespace forge {

namespace {

// x / p^v with the unit adjustment pi = u p
OKElem div_p_relaxed(const OKRing& R, const OKElem& x, int v) {
    if (v == 0) return x;
    OKElem r = R.div_by_pi_relaxed(x, v);
    return R.mul(r, R.pow(R.pi_unit(), (u128)v));
}

} // namespace

PSeries gm_endo(const OKRing& R, const OKElem& alpha, const PSeries& g, int n) {
    if (g.n > 0 && g.cvfl(0) < 1 && !g.R->is_zero_raw(g.at(0)))
        throw BadInput("gm_endo: val(g(0)) >= 1 required");
    const Ring& A = *g.R;
    int cap = A.prec_cap();
    PSeries acc = ps_zero(A, n);
    PSeries gpow = ps_one(A, n);
    OKElem binom = R.one();
    int xv = ps_xval(g);
    int gv = cap;
    for (int j = 0; j < g.n; ++j) gv = std::min(gv, g.vfl[j]);
    gv = std::max(gv, 0);
    for (int k = 1; k <= 4 * (R.M() + n); ++k) {
        gpow = ps_mul(gpow, g, n);
        // binom = C(alpha, k) = C(alpha, k-1) (alpha - k + 1)/k
        OKElem num = R.mul(binom, R.sub(alpha, R.from_int(k - 1)));
        int vk = 0;
        long long kk = k;
        while (kk % (long long)R.p() == 0) {
            ++vk;
            kk /= (long long)R.p();
        }
        binom = R.mul(div_p_relaxed(R, num, vk), R.inv(R.from_int(kk)));
        bool binom_dead = R.is_zero_mod(binom, R.M()) && binom.prec >= R.M();
        if (!binom_dead) acc = ps_add(acc, ps_scale_ok(gpow, binom));
        // integer exponents terminate; otherwise stop once all later terms
        // vanish in the window (x-adically) or below the modulus
        if (binom_dead && k > 1 && xv >= 1) break;
        if (xv >= 1 && (long long)(k + 1) * xv >= n) break;
        if (gv >= 1 && (long long)(k + 1) * gv >= cap) break;
        if ((long long)k > (long long)n + cap + 4) break;
    }
    return acc;
}

PSeries gm_log(const OKRing& R, const PSeries& g, int n) {
    if (!ps_divisible_pi(g, 1)) throw BadInput("gm_log: pi | g required");
    const Ring& A = *g.R;
    int cap = A.prec_cap();
    PSeries acc = ps_zero(A, n);
    PSeries gpow = ps_one(A, n);
    int xv = ps_xval(g);
    for (int k = 1; k <= 4 * R.M() + n; ++k) {
        gpow = ps_mul(gpow, g, n);
        int vk = 0;
        long long kk = k;
        while (kk % (long long)R.p() == 0) {
            ++vk;
            kk /= (long long)R.p();
        }
        OKElem c = R.mul(R.from_int((k % 2) ? 1 : -1), R.inv(R.from_int(kk)));
        PSeries term = ps_scale_ok(gpow, c);
        if (vk > 0) term = ps_div_pi(ps_scale_ok(term, R.pow(R.pi_unit(), (u128)vk)), vk);
        acc = ps_add(acc, term);
        if ((long long)(k + 1) - vk - 2 >= cap) break;
        if (xv >= 1 && (long long)(k + 1) * xv >= n) break;
    }
    return acc;
}

KSeries gm_log_k(const OKRing& R, const PSeries& g, int n) {
    if (ps_xval(g) < 1) throw BadInput("gm_log_k: x | g required");
    KSeries acc = ks_zero(R, n);
    PSeries gpow = ps_one(*g.R, n);
    for (int k = 1; k <= n; ++k) {
        gpow = ps_mul(gpow, g, n);
        int vk = 0;
        long long kk = k;
        while (kk % (long long)R.p() == 0) {
            ++vk;
            kk /= (long long)R.p();
        }
        KElem c{R.mul(R.mul(R.from_int((k % 2) ? 1 : -1), R.inv(R.from_int(kk))),
                      R.pow(R.pi_unit(), (u128)vk)),
                -vk};
        KSeries term = ks_scale(ks_from_ps(gpow), c);
        acc = ks_add(acc, term);
        if ((long long)(k + 1) * ps_xval(g) >= n) break;
    }
    acc.tail = KTail::none();
    return acc;
}

PSeries gm_ominus(const PSeries& a, const PSeries& b, int n) {
    PSeries oneb = ps_add(ps_one(*b.R, n), ps_resize(b, n));
    PSeries diff = ps_sub(ps_resize(a, n), ps_resize(b, n));
    return ps_mul(diff, ps_inverse(oneb, n), n);
}

PSeries phi_gm(const FormalGroup& Gf, const PSeries& f, int n) {
    const OKRing& R = Gf.okr();
    if (f.n > 0 && f.cvfl(0) < 1 && !f.R->is_zero_raw(f.at(0)))
        throw BadInput("phi_gm: val(f(0)) >= 1 required");
    // [q]_Gm(f) = (1+f)^q - 1 with integer binomials, exact
    PSeries A = gm_endo(R, R.q_elem(), ps_resize(f, n), n);
    PSeries B = ps_compose(ps_resize(f, n), Gf.seed_ps(n), n);
    PSeries r = gm_ominus(A, B, n);
    if (!ps_divisible_pi(r, 1))
        throw IdentityViolation("phi_gm(f) is not divisible by pi");
    // the q-power Frobenius congruence applies to the whole series
    if (r.tail_vfl < 1) r.tail_vfl = 1;
    return r;
}

int min_r(const OKRing& R) {
    // sufficient bound: least r with p | pi^r; direct check against the
    // generator pi x
    int sufficient = 1;
    {
        OKElem pp = R.pi();
        int r = 1;
        while (!R.is_zero_mod(pp, 1) && r < R.M()) {
            pp = R.mul(pp, R.pi());
            ++r;
        }
        sufficient = r;
    }
    OkAsRing A(R);
    for (int r = 0; r <= sufficient; ++r) {
        PSeries gen = ps_monomial_ok(A, 4, R.pi(), 1);
        OKElem pr = R.one();
    for (int i = 0; i < r; ++i) pr = R.mul_int(pr, (long long)R.p());
        PSeries img = gm_endo(R, pr, gen, (int)R.q() + 2);
        if (ps_divisible_pi(img, 1)) return r;
    }
    return sufficient;
}

bool norm_compatible(const ColemanContext& C, const PSeries& g, int nout) {
    PSeries oneg = ps_add(ps_one(*g.R, g.n), ps_resize(g, g.n));
    PSeries nm = C.norm_op(oneg, nout);
    PSeries d = ps_sub(nm, ps_resize(oneg, nout));
    return ps_is_zero(d);
}

PSeries inject_to_kernel(const ColemanContext& C, const PSeries& g, int n,
                         int to_cprime) {
    const FormalGroup& G = C.group();
    const OKRing& R = G.okr();
    if (!norm_compatible(C, g, std::min(n, std::max(8, n / 2))))
        throw NotNormCompatible("inject_to_kernel: 1 + g is not a norm fixed point");
    PSeries d = phi_gm(G, ps_resize(g, n), n);
    int r = min_r(R);
    OKElem pr = R.one();
    for (int i = 0; i < r; ++i) pr = R.mul_int(pr, (long long)R.p());
    PSeries twisted = r == 0 ? d : gm_endo(R, pr, d, n);
    PSeries s = gm_log(R, twisted, n);
    PSeries ls = C.trace_op(s, std::min(n, C.J()));
    if (!ps_is_zero(ls))
        throw IdentityViolation("inject_to_kernel: output escaped the trace kernel");
    if (!ps_divisible_pi(s, 1))
        throw IdentityViolation("inject_to_kernel: output is not divisible by p");
    if (to_cprime >= 2) {
        PSeries fser = G.seed_ps(n);
        for (int i = 0; i < to_cprime; ++i) s = ps_mul(s, fser, n);
    }
    return s;
}

std::vector<int> injectivity_certificate(const OKRing& R, int N) {
    std::vector<int> out;
    for (int d = 0; d < N; ++d) {
        OKElem v = R.sub(R.q_elem(), R.pi_pow(d + 1));
        auto val = R.valuation(v);
        if (!val.has_value())
            throw IdentityViolation("q = pi^" + std::to_string(d + 1) +
                                    " at working precision: injection unavailable");
        out.push_back(*val);
    }
    return out;
}

} // namespace forge
