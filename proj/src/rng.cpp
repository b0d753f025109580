#include "forge/rng.hpp"

namespace forge {

OKElem rand_ok(const OKRing& R, Rng& rng) {
    OKElem a = R.zero();
    for (int i = 0; i < R.deg(); ++i)
        a.c[i] = R.zctx().from_u128(((u128)rng() << 64) | rng());
    return a;
}

OKElem rand_ok_unit(const OKRing& R, Rng& rng) {
    for (;;) {
        OKElem a = rand_ok(R, rng);
        auto v = R.valuation(a);
        if (v.has_value() && *v == 0) return a;
    }
}

PSeries rand_series(const Ring& A, int n, Rng& rng, int pimul, bool zero_const) {
    const OKRing& R = A.okr();
    PSeries f = ps_zero(A, n);
    for (int i = 0; i < n; ++i) {
        if (i == 0 && zero_const) continue;
        OKElem x = rand_ok(R, rng);
        if (pimul > 0) x = R.mul(x, R.pi_pow(pimul));
        ps_set_ok(f, i, x);
    }
    return f;
}

} // namespace forge
