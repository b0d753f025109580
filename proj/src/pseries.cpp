#include "forge/pseries.hpp"

#include <algorithm>
#include <cstring>

namespace forge {

namespace {

int clampi(int v, int lo, int hi) { return std::max(lo, std::min(hi, v)); }

// effective precision of an integral value: nothing is known below p^0
int eprec(int p) { return std::max(p, 0); }

// valuation floor of a stored coefficient, with exactly-zero entries treated
// as infinitely deep (they contribute nothing, not merely something below
// the modulus)
int vfl_or_inf(const PSeries& f, int j) {
    if (j >= f.n) return f.cvfl(j);
    if (f.R->is_zero_raw(f.at(j)) && f.prec[j] >= f.R->prec_cap()) return TAIL_EXACT;
    return f.vfl[j];
}

// sharpest generic valuation floor: min(raw valuation, precision)
void refresh_one(const Ring& R, const Zp* blk, int prec, int& vfl) {
    vfl = std::min(R.vfloor_raw(blk), std::max(prec, 0));
}

} // namespace

PSeries ps_zero(const Ring& R, int n) {
    PSeries f;
    f.R = &R;
    f.n = n;
    f.c.assign((size_t)n * R.rank(), Zp{});
    f.prec.assign(n, R.prec_cap());
    f.vfl.assign(n, R.prec_cap());
    return f;
}

PSeries ps_one(const Ring& R, int n) {
    PSeries f = ps_zero(R, n);
    ps_set_ok(f, 0, R.okr().one());
    return f;
}

PSeries ps_x(const Ring& R, int n) {
    PSeries f = ps_zero(R, n);
    if (n > 1) ps_set_ok(f, 1, R.okr().one());
    return f;
}

PSeries ps_monomial_ok(const Ring& R, int n, const OKElem& a, int deg) {
    PSeries f = ps_zero(R, n);
    if (deg < n) ps_set_ok(f, deg, a);
    return f;
}

PSeries ps_from_ok(const Ring& R, int n, const std::vector<OKElem>& coeffs) {
    PSeries f = ps_zero(R, n);
    for (size_t i = 0; i < coeffs.size() && (int)i < n; ++i) ps_set_ok(f, (int)i, coeffs[i]);
    return f;
}

PSeries ps_resize(const PSeries& f, int n) {
    const Ring& R = *f.R;
    PSeries g = ps_zero(R, n);
    int keep = std::min(n, f.n);
    std::memcpy((void*)g.c.data(), f.c.data(), (size_t)keep * R.rank() * sizeof(Zp));
    for (int i = 0; i < keep; ++i) {
        g.prec[i] = f.prec[i];
        g.vfl[i] = f.vfl[i];
    }
    for (int i = keep; i < n; ++i) {
        g.prec[i] = f.cprec(i);
        g.vfl[i] = f.cvfl(i);
    }
    if (n < f.n) {
        // dropped stored coefficients become unknown tail
        int t = f.tail_vfl;
        for (int i = n; i < f.n; ++i) t = std::min(t, f.vfl[i]);
        g.tail_vfl = t;
    } else {
        g.tail_vfl = f.tail_vfl;
    }
    return g;
}

PSeries ps_extend_exact(const PSeries& f, int n) {
    const Ring& R = *f.R;
    PSeries g = ps_zero(R, n);
    int keep = std::min(n, f.n);
    std::memcpy((void*)g.c.data(), f.c.data(), (size_t)keep * R.rank() * sizeof(Zp));
    for (int i = 0; i < keep; ++i) {
        g.prec[i] = f.prec[i];
        g.vfl[i] = f.vfl[i];
    }
    g.tail_vfl = f.tail_vfl;
    return g;
}

void ps_set_ok(PSeries& f, int i, const OKElem& a) {
    const Ring& R = *f.R;
    R.embed_ok(a, f.at(i));
    f.prec[i] = clampi(a.prec * R.ram(), -TAIL_EXACT, R.prec_cap());
    refresh_one(R, f.at(i), f.prec[i], f.vfl[i]);
}

OKElem ps_get_ok(const PSeries& f, int i) {
    const OKRing& ok = f.R->okr();
    if (f.R->rank() != ok.deg()) throw Error("ps_get_ok: series is not over O_K");
    OKElem a = ok.zero();
    if (i < f.n) {
        for (int k = 0; k < ok.deg(); ++k) a.c[k] = f.at(i)[k];
        a.prec = clampi(f.prec[i], -TAIL_EXACT, ok.M());
    } else {
        a.prec = clampi(f.cprec(i), -TAIL_EXACT, ok.M());
    }
    return a;
}

void ps_refresh_meta(PSeries& f) {
    for (int i = 0; i < f.n; ++i) refresh_one(*f.R, f.at(i), f.prec[i], f.vfl[i]);
}

PSeries ps_add(const PSeries& a, const PSeries& b) {
    const Ring& R = *a.R;
    int n = std::max(a.n, b.n);
    PSeries r = ps_zero(R, n);
    for (int i = 0; i < n; ++i) {
        if (i < a.n && i < b.n) R.add(a.at(i), b.at(i), r.at(i));
        else if (i < a.n) R.copy(a.at(i), r.at(i));
        else if (i < b.n) R.copy(b.at(i), r.at(i));
        r.prec[i] = std::min(a.cprec(i), b.cprec(i));
        refresh_one(R, r.at(i), r.prec[i], r.vfl[i]);
    }
    r.tail_vfl = std::min(a.tail_vfl, b.tail_vfl);
    return r;
}

PSeries ps_sub(const PSeries& a, const PSeries& b) {
    return ps_add(a, ps_neg(b));
}

PSeries ps_neg(const PSeries& a) {
    PSeries r = a;
    const Ring& R = *a.R;
    for (int i = 0; i < a.n; ++i) R.neg(a.at(i), r.at(i));
    return r;
}

namespace {

// indices whose coefficient carries any information (nonzero or imprecise)
std::vector<int> live_indices(const PSeries& a) {
    std::vector<int> idx;
    for (int i = 0; i < a.n; ++i)
        if (!a.R->is_zero_raw(a.at(i)) || a.prec[i] < a.R->prec_cap()) idx.push_back(i);
    return idx;
}

} // namespace

PSeries ps_mul(const PSeries& a, const PSeries& b, int nout, MulPath path) {
    const Ring& R = *a.R;
    PSeries r = ps_zero(R, nout);

    std::vector<int> ia = live_indices(a), ib = live_indices(b);
    const bool sparse = std::min(ia.size(), ib.size()) <= 6 &&
                        ia.size() * ib.size() < (size_t)a.n * b.n / 2;

    std::vector<int> p(nout, R.prec_cap());
    if (sparse) {
        // gather by output coefficient so the loop parallelizes cleanly
        const std::vector<int>& few = ia.size() <= ib.size() ? ia : ib;
        const PSeries& fs = ia.size() <= ib.size() ? a : b;
        const PSeries& os = ia.size() <= ib.size() ? b : a;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (nout >= 256)
#endif
        for (int k = 0; k < nout; ++k) {
            std::vector<Zp> prod(R.rank()), scratch(R.scratch());
            for (int j : few) {
                int i = k - j;
                if (i < 0 || i >= os.n) continue;
                R.mul(fs.at(j), os.at(i), prod.data(), scratch.data());
                R.add(r.at(k), prod.data(), r.at(k));
                int t = std::min(sat_add(eprec(fs.prec[j]), os.vfl[i]),
                                 sat_add(eprec(os.prec[i]), fs.vfl[j]));
                p[k] = std::min(p[k], t);
            }
        }
    } else {
        poly_mul_trunc(R, a.c.data(), a.n, b.c.data(), b.n, r.c.data(), nout, path);
        // precision: |d(xy)| <= |x||dy| + |y||dx|
        for (int i : ia) {
            int pa = eprec(a.prec[i]), va = a.vfl[i];
            for (int j : ib) {
                if (i + j >= nout) continue;
                int t = std::min(sat_add(pa, b.vfl[j]), sat_add(eprec(b.prec[j]), va));
                p[i + j] = std::min(p[i + j], t);
            }
        }
    }
    // unknown-tail pollution
    int gb = b.tail_vfl, ga = a.tail_vfl;
    for (int j = 0; j < b.n; ++j) gb = std::min(gb, b.vfl[j]);
    for (int i = 0; i < a.n; ++i) ga = std::min(ga, a.vfl[i]);
    if (a.tail_vfl < TAIL_EXACT || b.tail_vfl < TAIL_EXACT) {
        std::vector<int> cumA(nout), cumB(nout);
        int ma = TAIL_EXACT, mb = TAIL_EXACT;
        for (int k = 0; k < nout; ++k) {
            ma = std::min(ma, a.cvfl(k));
            mb = std::min(mb, b.cvfl(k));
            cumA[k] = ma;
            cumB[k] = mb;
        }
        if (a.tail_vfl < TAIL_EXACT)
            for (int k = a.n; k < nout; ++k)
                p[k] = std::min(p[k], sat_add(a.tail_vfl, cumB[k - a.n]));
        if (b.tail_vfl < TAIL_EXACT)
            for (int k = b.n; k < nout; ++k)
                p[k] = std::min(p[k], sat_add(b.tail_vfl, cumA[k - b.n]));
    }
    for (int k = 0; k < nout; ++k) {
        r.prec[k] = clampi(p[k], -TAIL_EXACT, R.prec_cap());
        refresh_one(R, r.at(k), r.prec[k], r.vfl[k]);
    }
    if (a.exact_poly() && b.exact_poly() && nout >= a.n + b.n - 1)
        r.tail_vfl = TAIL_EXACT;
    else
        r.tail_vfl = sat_add(ga, gb);
    return r;
}

PSeries ps_scale_ok(const PSeries& a, const OKElem& s) {
    const Ring& R = *a.R;
    int rm = R.ram();
    PSeries r = ps_zero(R, a.n);
    int vs = R.okr().vfloor(s), ps = clampi(eprec(s.prec), 0, R.okr().M());
    for (int i = 0; i < a.n; ++i) {
        R.mul_ok(a.at(i), s, r.at(i));
        r.prec[i] = std::min(sat_add(eprec(a.prec[i]), rm * vs), sat_add(rm * ps, a.vfl[i]));
        r.prec[i] = clampi(r.prec[i], -TAIL_EXACT, R.prec_cap());
        refresh_one(R, r.at(i), r.prec[i], r.vfl[i]);
    }
    r.tail_vfl = sat_add(a.tail_vfl, rm * vs);
    if (a.exact_poly()) r.tail_vfl = TAIL_EXACT;
    return r;
}

PSeries ps_scale_int(const PSeries& a, long long k) {
    return ps_scale_ok(a, a.R->okr().from_int(k));
}

PSeries ps_shift_x(const PSeries& a, int k, int nout) {
    const Ring& R = *a.R;
    PSeries r = ps_zero(R, nout);
    for (int i = 0; i + k < nout && i < a.n; ++i) {
        R.copy(a.at(i), r.at(i + k));
        r.prec[i + k] = a.prec[i];
        r.vfl[i + k] = a.vfl[i];
    }
    r.tail_vfl = a.tail_vfl;
    return r;
}

PSeries ps_div_x_exact(const PSeries& a, int k) {
    const Ring& R = *a.R;
    for (int i = 0; i < k && i < a.n; ++i)
        if (!R.zero_mod(a.at(i), a.prec[i]))
            throw DivisibilityViolation("ps_div_x_exact: nonzero low coefficient");
    PSeries r = ps_zero(R, std::max(a.n - k, 0));
    for (int i = k; i < a.n; ++i) {
        R.copy(a.at(i), r.at(i - k));
        r.prec[i - k] = a.prec[i];
        r.vfl[i - k] = a.vfl[i];
    }
    r.tail_vfl = a.tail_vfl;
    return r;
}

PSeries ps_div_pi(const PSeries& a, int k) {
    const Ring& R = *a.R;
    int rm = R.ram();
    PSeries r = a;
    for (int i = 0; i < a.n; ++i) {
        int rawv = R.vfloor_raw(r.at(i));
        if (rawv >= rm * k) {
            R.div_by_pi_raw(r.at(i), k);
        } else if (a.prec[i] <= rm * k) {
            // nothing known below pi^k: the quotient is pure junk
            R.set_zero(r.at(i));
        } else {
            throw NotDivisible("ps_div_pi: coefficient " + std::to_string(i) +
                               " not divisible at working precision");
        }
        r.prec[i] = clampi(a.prec[i] - rm * k, -TAIL_EXACT, R.prec_cap());
        refresh_one(R, r.at(i), r.prec[i], r.vfl[i]);
    }
    if (r.tail_vfl < TAIL_EXACT) r.tail_vfl -= rm * k;
    return r;
}

PSeries ps_derivative(const PSeries& a) {
    const Ring& R = *a.R;
    const OKRing& ok = R.okr();
    PSeries r = ps_zero(R, std::max(a.n - 1, 1));
    for (int i = 0; i + 1 < a.n; ++i) {
        OKElem m = ok.from_int(i + 1);
        R.mul_ok(a.at(i + 1), m, r.at(i));
        r.prec[i] = clampi(sat_add(a.prec[i + 1], R.ram() * ok.vfloor(m)), -TAIL_EXACT,
                           R.prec_cap());
        refresh_one(R, r.at(i), r.prec[i], r.vfl[i]);
    }
    r.tail_vfl = a.tail_vfl;
    return r;
}

int ps_xval(const PSeries& a) {
    for (int i = 0; i < a.n; ++i)
        if (!a.R->zero_mod(a.at(i), a.prec[i])) return i;
    return a.n;
}

bool ps_divisible_pi(const PSeries& a, int k) {
    int need = k * a.R->ram();
    for (int i = 0; i < a.n; ++i)
        if (!a.R->zero_mod(a.at(i), std::min(need, a.prec[i]))) return false;
    return true;
}

bool ps_is_zero(const PSeries& a) {
    for (int i = 0; i < a.n; ++i)
        if (!a.R->zero_mod(a.at(i), a.prec[i])) return false;
    return true;
}

int ps_effective_len(const PSeries& a) {
    int d = 0;
    while (d < a.n && a.prec[d] > 0) ++d;
    return d;
}

int ps_min_prec(const PSeries& a, int len) {
    int m = a.R->prec_cap();
    for (int i = 0; i < std::min(len, a.n); ++i) m = std::min(m, a.prec[i]);
    return m;
}

namespace {

// r += coefficient-scaled series: r += blk * g, blk a ring element
void acc_scaled(PSeries& r, const PSeries& g, const Zp* blk, int bprec, int bvfl) {
    const Ring& R = *r.R;
    std::vector<Zp> prod(R.rank()), scratch(R.scratch());
    for (int i = 0; i < g.n && i < r.n; ++i) {
        R.mul(g.at(i), blk, prod.data(), scratch.data());
        R.add(r.at(i), prod.data(), r.at(i));
        int t = std::min(sat_add(eprec(g.prec[i]), bvfl), sat_add(eprec(bprec), g.vfl[i]));
        r.prec[i] = std::min(r.prec[i], t);
        refresh_one(R, r.at(i), r.prec[i], r.vfl[i]);
    }
    if (g.tail_vfl < TAIL_EXACT) r.tail_vfl = std::min(r.tail_vfl, sat_add(g.tail_vfl, bvfl));
}

} // namespace

PSeries ps_compose(const PSeries& f, const PSeries& g, int nout) {
    const Ring& R = *f.R;
    if (f.n > 0 && !(g.n == 0 || g.cvfl(0) >= 1)) {
        if (!f.exact_poly())
            throw ConstantTermNotTopologicallyNilpotent(
                "compose: inner constant term is a unit and outer series is not a polynomial");
    }
    PSeries acc = ps_zero(R, nout);
    PSeries gpow = ps_one(R, nout);
    for (int d = 0; d < f.n; ++d) {
        if (d > 0) gpow = ps_mul(gpow, g, nout);
        if (!R.is_zero_raw(f.at(d)) || f.prec[d] < R.prec_cap())
            acc_scaled(acc, gpow, f.at(d), f.prec[d], f.vfl[d]);
    }
    if (!f.exact_poly()) {
        // tail of f times g^{f.n} and higher powers; below x^{f.n * xval(g)}
        // those powers vanish identically
        PSeries glast = f.n > 0 ? ps_mul(gpow, g, nout) : ps_one(R, nout);
        long long structural = (long long)f.n * ps_xval(g);
        int cm = TAIL_EXACT;
        for (int k = 0; k < nout; ++k) {
            if (k >= structural) cm = std::min(cm, glast.cvfl(k));
            acc.prec[k] = std::min(acc.prec[k], sat_add(f.tail_vfl, cm));
            refresh_one(R, acc.at(k), acc.prec[k], acc.vfl[k]);
        }
        acc.tail_vfl = std::min(acc.tail_vfl, sat_add(f.tail_vfl, cm));
    }
    return acc;
}

PSeries ps_inverse(const PSeries& f, int nout) {
    const Ring& R = *f.R;
    if (f.n == 0 || R.vfloor_raw(f.at(0)) > 0 || f.prec[0] <= 0)
        throw NotInvertible("ps_inverse: constant term is not a unit");
    PSeries r = ps_zero(R, nout);
    std::vector<Zp> c0inv(R.rank()), prod(R.rank()), scratch(R.scratch());
    R.inv_raw(f.at(0), c0inv.data());
    R.copy(c0inv.data(), r.at(0));
    r.prec[0] = f.prec[0];
    refresh_one(R, r.at(0), r.prec[0], r.vfl[0]);

    std::vector<Zp> acc(R.rank());
    for (int k = 1; k < nout; ++k) {
        R.set_zero(acc.data());
        int pk = R.prec_cap();
        for (int j = 1; j <= k; ++j) {
            int fj_prec = f.cprec(j), fj_vfl = f.cvfl(j);
            if (j < f.n) {
                R.mul(f.at(j), r.at(k - j), prod.data(), scratch.data());
                R.add(acc.data(), prod.data(), acc.data());
            }
            pk = std::min(pk, std::min(sat_add(eprec(fj_prec), r.vfl[k - j]),
                                       sat_add(eprec(r.prec[k - j]), fj_vfl)));
        }
        R.mul(acc.data(), c0inv.data(), prod.data(), scratch.data());
        R.neg(prod.data(), r.at(k));
        r.prec[k] = clampi(std::min(pk, sat_add(r.prec[0], 0)), -TAIL_EXACT, R.prec_cap());
        refresh_one(R, r.at(k), r.prec[k], r.vfl[k]);
    }
    r.tail_vfl = 0;
    return r;
}

PSeries ps_div(const PSeries& a, const PSeries& b, int nout) {
    return ps_mul(a, ps_inverse(b, nout), nout);
}

Val ps_eval(const PSeries& f, const Val& point, const Ring& R) {
    int vp = R.vfloor_raw(point.b.data());
    vp = std::min(vp, std::max(point.prec, 0));
    if (vp < 1 && !f.exact_poly())
        throw ConstantTermNotTopologicallyNilpotent("ps_eval: point is not topologically nilpotent");
    const bool same_ring = (f.R == &R);
    if (!same_ring && f.R->rank() != f.R->okr().deg())
        throw Error("ps_eval: cross-ring evaluation only from O_K series");
    // scale from the series' lattice units into R's
    const int scale = same_ring ? 1 : R.ram();
    Val acc;
    acc.b.assign(R.rank(), Zp{});
    acc.prec = R.prec_cap();
    std::vector<Zp> prod(R.rank()), scratch(R.scratch()), emb(R.rank());
    for (int d = f.n - 1; d >= 0; --d) {
        int av = std::min(R.vfloor_raw(acc.b.data()), std::max(acc.prec, 0));
        R.mul(acc.b.data(), point.b.data(), prod.data(), scratch.data());
        acc.prec = std::min(sat_add(eprec(acc.prec), vp), sat_add(eprec(point.prec), av));
        acc.b.assign(prod.begin(), prod.end());
        if (same_ring) {
            R.add(acc.b.data(), f.at(d), acc.b.data());
        } else {
            R.embed_ok(ps_get_ok(f, d), emb.data());
            R.add(acc.b.data(), emb.data(), acc.b.data());
        }
        acc.prec = std::min(acc.prec, scale * f.prec[d]);
    }
    if (!f.exact_poly())
        acc.prec = std::min(acc.prec, sat_add(scale * f.tail_vfl, f.n * vp));
    acc.prec = clampi(acc.prec, -TAIL_EXACT, R.prec_cap());
    return acc;
}

Val val_from_ok(const Ring& R, const OKElem& a) {
    Val v;
    v.b.assign(R.rank(), Zp{});
    R.embed_ok(a, v.b.data());
    v.prec = clampi(a.prec * R.ram(), -TAIL_EXACT, R.prec_cap());
    return v;
}

OKElem ok_from_val(const Ring& R, const Val& v) {
    const OKRing& ok = R.okr();
    if (R.rank() != ok.deg()) throw Error("ok_from_val: ring is not O_K");
    OKElem a = ok.zero();
    for (int i = 0; i < ok.deg(); ++i) a.c[i] = v.b[i];
    a.prec = clampi(v.prec, -TAIL_EXACT, ok.M());
    return a;
}

PSeries ps_comp_inverse(const PSeries& f, int nout) {
    const Ring& R = *f.R;
    const OKRing& ok = R.okr();
    if (f.n == 0 || !R.zero_mod(f.at(0), f.prec[0]))
        throw BadInput("ps_comp_inverse: constant term must vanish");
    if (f.n < 2) throw NotInvertible("ps_comp_inverse: no linear term");
    OKElem f1 = ps_get_ok(f, 1);
    auto v1opt = ok.valuation(f1);
    if (!v1opt.has_value()) throw NotInvertible("ps_comp_inverse: linear term vanishes at precision");
    int v1 = *v1opt;

    if (v1 == 0) {
        // Newton iteration g <- g - (f(g) - x) / f'(g), doubling the degree
        PSeries fp = ps_derivative(f);
        int len = 2;
        PSeries g = ps_zero(R, 2);
        ps_set_ok(g, 1, ok.inv(f1));
        g.tail_vfl = 0;
        while (len < nout) {
            len = std::min(2 * len, nout);
            PSeries gl = ps_resize(g, len);
            gl.tail_vfl = 0;
            PSeries r = ps_sub(ps_compose(f, gl, len), ps_x(R, len));
            PSeries d = ps_div(r, ps_compose(fp, gl, len), len);
            g = ps_sub(gl, d);
        }
        return ps_resize(g, nout);
    }

    // non-unit linear term: the inverse starts at x / f'(0), which already
    // has a pole of order v1 -- no integral precision budget can absorb it
    throw PrecisionExhausted(
        "ps_comp_inverse: f'(0) has valuation " + std::to_string(v1) +
        ", the inverse has K-coefficients beyond the integral budget");
}

PSeries converge_detect(const std::vector<PSeries>& seq, GainKind kind, int gain,
                        int* steps_out) {
    if (seq.empty()) throw BadInput("converge_detect: empty sequence");
    if (gain < 1) throw BadInput("converge_detect: gain must be >= 1");
    for (size_t k = 0; k + 1 < seq.size(); ++k) {
        PSeries d = ps_sub(seq[k + 1], seq[k]);
        if (ps_is_zero(d)) {
            if (steps_out) *steps_out = (int)(k + 1);
            return seq[k + 1];
        }
        if (kind == GainKind::XAdic) {
            if (ps_xval(d) < (int)(k + 1) * gain)
                throw NoConvergence("converge_detect: x-adic gain violated");
        } else {
            if (!ps_divisible_pi(d, std::min((int)(k + 1) * gain,
                                             d.R->okr().M())))
                throw NoConvergence("converge_detect: pi-adic gain violated");
        }
    }
    // never stabilized within the provided steps
    PSeries d = ps_sub(seq.back(), seq[seq.size() - 2]);
    if (!ps_is_zero(d)) throw NoConvergence("converge_detect: sequence did not stabilize");
    if (steps_out) *steps_out = (int)seq.size() - 1;
    return seq.back();
}

// ---------------------------------------------------------------------------

BiSeries bi_zero(const OKRing& R, int NF) {
    BiSeries F;
    F.R = &R;
    F.NF = NF;
    F.c.assign(F.tri() * R.deg(), Zp{});
    F.prec.assign(F.tri(), R.M());
    F.vfl.assign(F.tri(), R.M());
    return F;
}

void bi_set(BiSeries& F, int i, int j, const OKElem& a) {
    const OKRing& R = *F.R;
    for (int k = 0; k < R.deg(); ++k) F.at(i, j)[k] = a.c[k];
    F.prec[F.idx(i, j)] = clampi(a.prec, -TAIL_EXACT, R.M());
    F.vfl[F.idx(i, j)] = std::min(R.vfloor(a), std::max(a.prec, 0));
}

OKElem bi_get(const BiSeries& F, int i, int j) {
    const OKRing& R = *F.R;
    OKElem a = R.zero();
    for (int k = 0; k < R.deg(); ++k) a.c[k] = F.at(i, j)[k];
    a.prec = F.prec[F.idx(i, j)];
    return a;
}

BiSeries bi_add(const BiSeries& a, const BiSeries& b) {
    const OKRing& R = *a.R;
    const ZpCtx& z = R.zctx();
    BiSeries r = bi_zero(R, a.NF);
    for (size_t t = 0; t < a.tri() * R.deg(); ++t) r.c[t] = z.add(a.c[t], b.c[t]);
    for (size_t t = 0; t < a.tri(); ++t) {
        r.prec[t] = std::min(a.prec[t], b.prec[t]);
        r.vfl[t] = std::min(a.vfl[t], b.vfl[t]);
    }
    return r;
}

BiSeries bi_sub(const BiSeries& a, const BiSeries& b) {
    const OKRing& R = *a.R;
    const ZpCtx& z = R.zctx();
    BiSeries r = bi_zero(R, a.NF);
    for (size_t t = 0; t < a.tri() * R.deg(); ++t) r.c[t] = z.sub(a.c[t], b.c[t]);
    for (size_t t = 0; t < a.tri(); ++t) {
        r.prec[t] = std::min(a.prec[t], b.prec[t]);
        r.vfl[t] = std::min(a.vfl[t], b.vfl[t]);
    }
    return r;
}

BiSeries bi_mul(const BiSeries& a, const BiSeries& b) {
    const OKRing& R = *a.R;
    int NF = a.NF;
    BiSeries r = bi_zero(R, NF);
    std::vector<int> p(r.tri(), R.M());
    std::vector<Zp> prod(R.deg()), scratch(2 * R.deg());
    for (int i1 = 0; i1 < NF; ++i1)
        for (int j1 = 0; i1 + j1 < NF; ++j1) {
            size_t t1 = a.idx(i1, j1);
            bool azero = true;
            for (int k = 0; k < R.deg(); ++k)
                if (a.at(i1, j1)[k].v != 0) azero = false;
            if (azero && a.prec[t1] >= R.M()) continue;
            for (int i2 = 0; i1 + i2 < NF; ++i2)
                for (int j2 = 0; i1 + j1 + i2 + j2 < NF; ++j2) {
                    size_t t2 = b.idx(i2, j2);
                    size_t to = r.idx(i1 + i2, j1 + j2);
                    R.mul_raw(a.at(i1, j1), b.at(i2, j2), prod.data(), scratch.data());
                    for (int k = 0; k < R.deg(); ++k) {
                        Zp* dst = r.c.data() + to * R.deg() + k;
                        *dst = R.zctx().add(*dst, prod[k]);
                    }
                    p[to] = std::min(p[to],
                                     std::min(sat_add(eprec(a.prec[t1]), b.vfl[t2]),
                                              sat_add(eprec(b.prec[t2]), a.vfl[t1])));
                }
        }
    for (size_t t = 0; t < r.tri(); ++t) {
        r.prec[t] = p[t];
        int rv = R.M();
        for (int k = 0; k < R.deg(); ++k)
            rv = std::min(rv, R.zctx().val(r.c[t * R.deg() + k]));
        r.vfl[t] = std::min(rv, std::max(p[t], 0));
    }
    return r;
}

BiSeries bi_compose_poly(const std::vector<OKElem>& poly, const BiSeries& F) {
    const OKRing& R = *F.R;
    BiSeries acc = bi_zero(R, F.NF);
    for (int d = (int)poly.size() - 1; d >= 0; --d) {
        if (d != (int)poly.size() - 1) acc = bi_mul(acc, F);
        OKElem c0 = bi_get(acc, 0, 0);
        bi_set(acc, 0, 0, R.add(c0, poly[d]));
    }
    return acc;
}

PSeries bi_substitute(const BiSeries& F, const PSeries& f, const PSeries& g, int nout) {
    const Ring& R = *f.R;
    if (f.n > 0 && f.cvfl(0) < 1)
        throw ConstantTermNotTopologicallyNilpotent("bi_substitute: f(0) is a unit");
    if (g.n > 0 && g.cvfl(0) < 1)
        throw ConstantTermNotTopologicallyNilpotent("bi_substitute: g(0) is a unit");
    int NF = F.NF;
    // rows in y then Horner in f: F = sum_i x^i R_i(y)
    std::vector<PSeries> gpow;
    gpow.reserve(NF);
    gpow.push_back(ps_one(R, nout));
    for (int j = 1; j < NF; ++j) gpow.push_back(ps_mul(gpow.back(), g, nout));
    PSeries acc = ps_zero(R, nout);
    for (int i = NF - 1; i >= 0; --i) {
        if (i != NF - 1) acc = ps_mul(acc, f, nout);
        for (int j = 0; i + j < NF; ++j) {
            OKElem a = bi_get(F, i, j);
            if (F.vfl[F.idx(i, j)] >= R.okr().M() && a.prec >= R.okr().M()) continue;
            PSeries term = ps_scale_ok(gpow[j], a);
            acc = ps_add(acc, term);
        }
    }
    // truncation of the F table by total degree: a dropped monomial
    // a_{ij} f^i g^j with i + j >= NF contributes to x^k only with valuation
    // at least (NF - k) * min(val f(0), val g(0)); with vanishing constant
    // terms it cannot reach below x^NF at all
    int v0 = std::min(f.n > 0 ? vfl_or_inf(f, 0) : TAIL_EXACT,
                      g.n > 0 ? vfl_or_inf(g, 0) : TAIL_EXACT);
    int gvf = f.tail_vfl, gvg = g.tail_vfl;
    for (int i = 0; i < f.n; ++i) gvf = std::min(gvf, vfl_or_inf(f, i));
    for (int i = 0; i < g.n; ++i) gvg = std::min(gvg, vfl_or_inf(g, i));
    // every dropped monomial a_ij f^i g^j has i, j >= 1 by the unit laws
    int drop_floor = sat_add(gvf, gvg);
    if (v0 < TAIL_EXACT) {
        for (int k = 0; k < nout; ++k) {
            long long pol = std::max((long long)(NF - k) * v0, (long long)drop_floor);
            if (pol < TAIL_EXACT) {
                acc.prec[k] = std::min(acc.prec[k], (int)std::max(pol, -(long long)TAIL_EXACT));
                refresh_one(R, acc.at(k), acc.prec[k], acc.vfl[k]);
            }
        }
        acc.tail_vfl = std::min(acc.tail_vfl, drop_floor);
    } else {
        // vanishing constant terms: dropped monomials live at x^NF and above
        for (int k = NF; k < nout; ++k) {
            acc.prec[k] = std::min(acc.prec[k], std::min(drop_floor, TAIL_EXACT / 2));
            refresh_one(R, acc.at(k), acc.prec[k], acc.vfl[k]);
        }
        if (nout >= NF) acc.tail_vfl = std::min(acc.tail_vfl, drop_floor);
    }
    return acc;
}

Val bi_eval(const BiSeries& F, const Val& a, const Val& b, const Ring& R) {
    int NF = F.NF;
    std::vector<Zp> prod(R.rank()), scratch(R.scratch());
    int va = std::min(R.vfloor_raw(a.b.data()), std::max(a.prec, 0));
    int vb = std::min(R.vfloor_raw(b.b.data()), std::max(b.prec, 0));
    std::vector<Val> bpow(NF);
    bpow[0].b.assign(R.rank(), Zp{});
    R.embed_ok(R.okr().one(), bpow[0].b.data());
    bpow[0].prec = R.prec_cap();
    for (int j = 1; j < NF; ++j) {
        bpow[j].b.assign(R.rank(), Zp{});
        R.mul(bpow[j - 1].b.data(), b.b.data(), bpow[j].b.data(), scratch.data());
        bpow[j].prec = std::min(sat_add(eprec(bpow[j - 1].prec), vb),
                                sat_add(eprec(b.prec), (j - 1) * vb));
    }
    Val acc;
    acc.b.assign(R.rank(), Zp{});
    acc.prec = R.prec_cap();
    std::vector<Zp> row(R.rank());
    for (int i = NF - 1; i >= 0; --i) {
        if (i != NF - 1) {
            int av = std::min(R.vfloor_raw(acc.b.data()), std::max(acc.prec, 0));
            R.mul(acc.b.data(), a.b.data(), prod.data(), scratch.data());
            acc.prec = std::min(sat_add(eprec(acc.prec), va), sat_add(eprec(a.prec), av));
            acc.b.assign(prod.begin(), prod.end());
        }
        for (int j = 0; i + j < NF; ++j) {
            OKElem cij = bi_get(F, i, j);
            R.mul_ok(bpow[j].b.data(), cij, row.data());
            R.add(acc.b.data(), row.data(), acc.b.data());
            acc.prec = std::min(
                acc.prec,
                std::min(sat_add(eprec(bpow[j].prec), R.ram() * F.vfl[F.idx(i, j)]),
                         sat_add(R.ram() * eprec(F.prec[F.idx(i, j)]), j * vb)));
        }
    }
    acc.prec = std::min(acc.prec, NF * std::min(va, vb));
    acc.prec = clampi(acc.prec, -TAIL_EXACT, R.prec_cap());
    return acc;
}

PSeries lt_sum(const BiSeries& F, const std::vector<PSeries>& terms, int nout) {
    if (terms.empty()) throw BadInput("lt_sum: no terms");
    PSeries acc = terms[0];
    for (size_t i = 1; i < terms.size(); ++i) acc = bi_substitute(F, acc, terms[i], nout);
    return acc;
}

Val lt_sum_vals(const BiSeries& F, const std::vector<Val>& terms, const Ring& R) {
    if (terms.empty()) throw BadInput("lt_sum_vals: no terms");
    // balanced fold (the law is associative at working precision)
    std::vector<Val> cur = terms;
    while (cur.size() > 1) {
        std::vector<Val> next((cur.size() + 1) / 2);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
        for (int i = 0; i < (int)(cur.size() / 2); ++i)
            next[i] = bi_eval(F, cur[2 * i], cur[2 * i + 1], R);
        if (cur.size() % 2) next.back() = cur.back();
        cur = std::move(next);
    }
    return cur[0];
}

// ---------------------------------------------------------------------------

KElem k_of(const OKRing& R, const OKElem& a) {
    KElem x{a, 0};
    k_normalize(R, x);
    return x;
}

KElem k_zero(const OKRing& R) {
    return KElem{R.zero(), 0};
}

void k_normalize(const OKRing& R, KElem& x) {
    int raw = R.M();
    for (int i = 0; i < R.deg(); ++i) raw = std::min(raw, R.zctx().val(x.num.c[i]));
    if (raw >= R.M() && x.num.prec >= R.M()) { // exact zero
        x.num = R.zero();
        x.e = 0;
        return;
    }
    int k = std::min(raw, std::max(x.num.prec - 1, 0));
    if (k > 0) {
        x.num = R.div_by_pi(x.num, k);
        x.e += k;
    }
    if (x.e < -2 * R.M())
        throw PrecisionExhausted("K-coefficient denominator exceeds the pi-adic budget");
}

KElem k_add(const OKRing& R, const KElem& a, const KElem& b) {
    int e = std::min(a.e, b.e);
    OKElem na = a.num, nb = b.num;
    if (a.e > e) na = R.mul(na, R.pi_pow(std::min(a.e - e, R.M())));
    if (b.e > e) nb = R.mul(nb, R.pi_pow(std::min(b.e - e, R.M())));
    KElem r{R.add(na, nb), e};
    k_normalize(R, r);
    return r;
}

KElem k_sub(const OKRing& R, const KElem& a, const KElem& b) {
    KElem nb{R.neg(b.num), b.e};
    return k_add(R, a, nb);
}

KElem k_mul(const OKRing& R, const KElem& a, const KElem& b) {
    KElem r{R.mul(a.num, b.num), a.e + b.e};
    k_normalize(R, r);
    return r;
}

KElem k_inv(const OKRing& R, const KElem& a) {
    return KElem{R.inv(a.num), -a.e};
}

int k_vfloor(const OKRing& R, const KElem& a) {
    return a.e + R.vfloor(a.num);
}

int k_prec(const OKRing&, const KElem& a) {
    return sat_add(a.e, a.num.prec);
}

KSeries ks_zero(const OKRing& R, int n) {
    KSeries f;
    f.R = &R;
    f.n = n;
    f.c.assign(n, k_zero(R));
    f.tail = KTail::poly();
    return f;
}

KSeries ks_from_ps(const PSeries& f) {
    const OKRing& R = f.R->okr();
    KSeries r = ks_zero(R, f.n);
    for (int i = 0; i < f.n; ++i) r.c[i] = k_of(R, ps_get_ok(f, i));
    r.tail = f.exact_poly() ? KTail::poly() : KTail::floor(f.tail_vfl);
    return r;
}

namespace {

KTail kt_add(const KTail& a, const KTail& b) {
    if (a.exact && b.exact) return KTail::poly();
    if (!a.valid || !b.valid) return KTail::none();
    KTail r;
    r.valid = true;
    r.exact = false;
    // max of the two slopes and offsets bounds both
    if ((long long)a.alpha_num * b.alpha_den >= (long long)b.alpha_num * a.alpha_den) {
        r.alpha_num = a.alpha_num;
        r.alpha_den = a.alpha_den;
    } else {
        r.alpha_num = b.alpha_num;
        r.alpha_den = b.alpha_den;
    }
    r.beta = std::max(a.beta, b.beta);
    return r;
}

// minimal valuation over stored coefficients and the tail claim, pi-units
int ks_global_vfloor(const KSeries& g) {
    const OKRing& R = *g.R;
    int v = R.M();
    for (int j = 0; j < g.n; ++j) v = std::min(v, k_vfloor(R, g.c[j]));
    if (g.tail.exact) return v;
    if (!g.tail.valid) return -TAIL_EXACT;
    return std::min(v, -g.tail.beta);
}

} // namespace

KSeries ks_add(const KSeries& a, const KSeries& b) {
    const OKRing& R = *a.R;
    KSeries r = ks_zero(R, std::max(a.n, b.n));
    for (int i = 0; i < r.n; ++i) {
        KElem x = i < a.n ? a.c[i] : k_zero(R);
        KElem y = i < b.n ? b.c[i] : k_zero(R);
        r.c[i] = k_add(R, x, y);
    }
    r.tail = kt_add(a.tail, b.tail);
    return r;
}

KSeries ks_sub(const KSeries& a, const KSeries& b) {
    const OKRing& R = *a.R;
    KSeries nb = b;
    for (auto& x : nb.c) x.num = R.neg(x.num);
    return ks_add(a, nb);
}

KSeries ks_mul(const KSeries& a, const KSeries& b, int nout) {
    const OKRing& R = *a.R;
    KSeries r = ks_zero(R, nout);
    for (int i = 0; i < a.n && i < nout; ++i)
        for (int j = 0; j < b.n && i + j < nout; ++j)
            r.c[i + j] = k_add(R, r.c[i + j], k_mul(R, a.c[i], b.c[j]));
    if (a.tail.exact && b.tail.exact && nout >= a.n + b.n - 1)
        r.tail = KTail::poly();
    else
        r.tail = KTail::none();
    return r;
}

KSeries ks_scale(const KSeries& a, const KElem& s) {
    const OKRing& R = *a.R;
    KSeries r = a;
    for (int i = 0; i < a.n; ++i) r.c[i] = k_mul(R, a.c[i], s);
    if (r.tail.valid && !r.tail.exact) r.tail.beta = sat_add(r.tail.beta, -k_vfloor(R, s));
    return r;
}

KSeries ks_derivative(const KSeries& a) {
    const OKRing& R = *a.R;
    KSeries r = ks_zero(R, std::max(a.n - 1, 1));
    for (int i = 0; i + 1 < a.n; ++i)
        r.c[i] = k_mul(R, a.c[i + 1], k_of(R, R.from_int(i + 1)));
    r.tail = a.tail;
    if (r.tail.valid && !r.tail.exact) r.tail.beta = sat_add(r.tail.beta, r.tail.alpha_den > 0 ? (r.tail.alpha_num + r.tail.alpha_den - 1) / r.tail.alpha_den : 0);
    return r;
}

KSeries ks_compose_ks(const KSeries& f, const KSeries& g, int nout) {
    const OKRing& R = *f.R;
    if (g.n > 0 && !(R.is_zero_mod(g.c[0].num, R.M()) && g.c[0].num.prec >= R.M()))
        throw ConstantTermNotTopologicallyNilpotent("ks_compose_ks: g(0) != 0");
    KSeries acc = ks_zero(R, nout);
    for (int d = std::min(f.n, nout) - 1; d >= 0; --d) {
        if (d != std::min(f.n, nout) - 1) acc = ks_mul(acc, g, nout);
        acc.c[0] = k_add(R, acc.c[0], f.c[d]);
    }
    // x-val(g) >= 1, so unstored outer terms live at x-degree >= f.n
    if (!f.tail.exact && nout > f.n)
        for (int j = f.n; j < nout; ++j) {
            KElem& x = acc.c[j];
            int claim = f.tail.valid
                            ? -(f.tail.beta +
                                (int)(((long long)f.tail.alpha_num * (j - f.n) +
                                       f.tail.alpha_den - 1) /
                                      f.tail.alpha_den))
                            : -TAIL_EXACT;
            x.num.prec = std::min(x.num.prec, claim - x.e);
        }
    acc.tail = KTail::none();
    return acc;
}

KSeries ks_inverse(const KSeries& f, int nout) {
    const OKRing& R = *f.R;
    if (f.n == 0 || k_vfloor(R, f.c[0]) != 0)
        throw NotInvertible("ks_inverse: constant term is not a unit");
    KSeries r = ks_zero(R, nout);
    KElem c0i = k_inv(R, f.c[0]);
    r.c[0] = c0i;
    for (int k = 1; k < nout; ++k) {
        KElem acc = k_zero(R);
        for (int j = 1; j <= k && j < f.n; ++j)
            acc = k_add(R, acc, k_mul(R, f.c[j], r.c[k - j]));
        acc = k_mul(R, acc, c0i);
        acc.num = R.neg(acc.num);
        r.c[k] = acc;
    }
    r.tail = KTail::none();
    return r;
}

KSeries ks_compose_ps(const KSeries& f, const PSeries& g, int nout) {
    const OKRing& R = *f.R;
    if (g.R->rank() != R.deg())
        throw Error("ks_compose_ps: inner series must be over O_K");
    const int M = R.M();
    bool g0_zero = g.n == 0 || (g.R->is_zero_raw(g.at(0)) && g.prec[0] >= M);
    if (!g0_zero && g.cvfl(0) < 1 && !f.tail.exact)
        throw ConstantTermNotTopologicallyNilpotent("ks_compose_ps: g(0) is a unit");
    KSeries acc = ks_zero(R, nout);
    PSeries gpow = ps_one(*g.R, nout);
    for (int d = 0; d < f.n; ++d) {
        if (d > 0) gpow = ps_mul(gpow, g, nout);
        const KElem& cd = f.c[d];
        int cv = k_vfloor(R, cd), cp = k_prec(R, cd);
        if (R.is_zero_mod(cd.num, R.M()) && cd.num.prec >= R.M()) continue;
        for (int j = 0; j < nout; ++j) {
            int tv = sat_add(cv, gpow.vfl[j]);
            if (tv >= M) continue; // exactly zero mod p^M
            if (g.R->is_zero_raw(gpow.at(j)) && gpow.prec[j] >= M) continue;
            KElem gj = k_of(R, ps_get_ok(gpow, j));
            KElem term = k_mul(R, cd, gj);
            int tp = std::min(sat_add(std::max(cp, cd.e), gpow.vfl[j]),
                              sat_add(eprec(gpow.prec[j]), cv));
            term.num.prec = std::min(term.num.prec, tp - term.e);
            acc.c[j] = k_add(R, acc.c[j], term);
        }
    }
    int res_floor = TAIL_EXACT;
    if (!f.tail.exact) {
        // tail terms c_n g^n, n >= f.n: with val(c_n) >= -(beta + alpha(n-f.n))
        // and each extra power of g gaining at least vmin inside the output
        // window, the worst case is n = f.n provided vmin >= alpha; only
        // coefficients of g below the window can enter the gain
        int vmin = TAIL_EXACT;
        for (int j = 0; j < std::min(g.n, nout); ++j)
            vmin = std::min(vmin, vfl_or_inf(g, j));
        if (g.n < nout) vmin = std::min(vmin, g.tail_vfl);
        bool ok_slope = f.tail.valid &&
                        (long long)vmin * f.tail.alpha_den >= f.tail.alpha_num;
        PSeries glast = ps_mul(gpow, g, nout);
        long long structural = (long long)f.n * ps_xval(g);
        int cm = TAIL_EXACT;
        for (int j = 0; j < nout; ++j) {
            if (j >= structural) cm = std::min(cm, glast.cvfl(j));
            int pol = ok_slope ? sat_add(cm, -f.tail.beta) : -TAIL_EXACT;
            if (pol < TAIL_EXACT && cm < TAIL_EXACT) {
                KElem& x = acc.c[j];
                x.num.prec = std::min(x.num.prec, pol - x.e);
            }
        }
        res_floor = ok_slope && cm < TAIL_EXACT ? sat_add(cm, -f.tail.beta)
                    : ok_slope                  ? TAIL_EXACT
                                                : -TAIL_EXACT;
    }
    // unstored coefficients of the result: products of stored/return tails
    int gf = ks_global_vfloor(ks_from_ps(g));
    int ff = TAIL_EXACT;
    for (int d = 0; d < f.n; ++d) ff = std::min(ff, k_vfloor(R, f.c[d]));
    int base = (gf >= TAIL_EXACT || ff >= TAIL_EXACT) ? TAIL_EXACT : sat_add(ff, std::min(gf, 0));
    acc.tail = KTail::floor(std::min({base, res_floor}));
    if (f.tail.exact && g.exact_poly() && nout >= (f.n - 1) * std::max(g.n - 1, 1) + 1)
        acc.tail = KTail::poly();
    return acc;
}

PSeries ks_to_ps(const KSeries& f, const Ring& R, const std::string& what) {
    const OKRing& ok = *f.R;
    PSeries r = ps_zero(R, f.n);
    for (int i = 0; i < f.n; ++i) {
        KElem x = f.c[i];
        k_normalize(ok, x);
        if (x.e < 0) {
            if (k_prec(ok, x) > 0 && ok.vfloor(x.num) == 0)
                throw IntegralityViolation(what + ": coefficient " + std::to_string(i) +
                                           " has a pole of order " + std::to_string(-x.e));
            // unknown at or below precision zero
            OKElem junk = ok.zero();
            junk.prec = std::min(k_prec(ok, x), 0);
            ps_set_ok(r, i, junk);
            continue;
        }
        OKElem v = ok.mul(x.num, ok.pi_pow(std::min(x.e, ok.M())));
        v.prec = clampi(k_prec(ok, x), -TAIL_EXACT, ok.M());
        ps_set_ok(r, i, v);
    }
    if (f.tail.exact)
        r.tail_vfl = TAIL_EXACT;
    else if (f.tail.valid && f.tail.alpha_num == 0)
        r.tail_vfl = clampi(-f.tail.beta * R.ram(), -TAIL_EXACT, TAIL_EXACT);
    else
        r.tail_vfl = -TAIL_EXACT;
    return r;
}

Val ks_eval(const KSeries& f, const Val& point, const Ring& R) {
    const OKRing& ok = *f.R;
    int cap = R.prec_cap(), rm = R.ram();
    int vp = std::min(R.vfloor_raw(point.b.data()), std::max(point.prec, 0));
    if (vp < 1 && !f.tail.exact)
        throw ConstantTermNotTopologicallyNilpotent("ks_eval: point is not topologically nilpotent");
    Val acc;
    acc.b.assign(R.rank(), Zp{});
    acc.prec = cap;
    Val ptpow = acc; // 1
    R.embed_ok(ok.one(), ptpow.b.data());
    std::vector<Zp> term(R.rank()), prod(R.rank()), scratch(R.scratch());
    for (int d = 0; d < f.n; ++d) {
        if (d > 0) {
            int av = std::min(R.vfloor_raw(ptpow.b.data()), std::max(ptpow.prec, 0));
            R.mul(ptpow.b.data(), point.b.data(), prod.data(), scratch.data());
            ptpow.prec = std::min(sat_add(eprec(ptpow.prec), vp),
                                  sat_add(eprec(point.prec), av));
            ptpow.b.assign(prod.begin(), prod.end());
        }
        const KElem& cd = f.c[d];
        if (ok.is_zero_mod(cd.num, ok.M()) && cd.num.prec >= ok.M()) continue;
        int cv = rm * k_vfloor(ok, cd);
        int ptv = std::min(R.vfloor_raw(ptpow.b.data()), std::max(ptpow.prec, 0));
        if (sat_add(cv, ptv) >= cap) continue; // exactly zero mod the cap
        R.mul_ok(ptpow.b.data(), cd.num, term.data());
        int tprec = std::min(sat_add(rm * eprec(cd.num.prec), ptv),
                             sat_add(eprec(ptpow.prec), rm * ok.vfloor(cd.num)));
        if (cd.e >= 0) {
            OKElem sc = ok.pi_pow(std::min(cd.e, ok.M()));
            std::vector<Zp> t2(R.rank());
            R.mul_ok(term.data(), sc, t2.data());
            term.assign(t2.begin(), t2.end());
            tprec = sat_add(tprec, rm * cd.e);
        } else {
            R.div_by_pi_raw(term.data(), -cd.e);
            tprec = sat_add(tprec, rm * cd.e);
        }
        R.add(acc.b.data(), term.data(), acc.b.data());
        acc.prec = std::min(acc.prec, tprec);
    }
    if (!f.tail.exact) {
        bool ok_slope = f.tail.valid &&
                        (long long)vp * f.tail.alpha_den >= (long long)f.tail.alpha_num * rm;
        int pol = ok_slope ? sat_add(f.n * vp, -rm * f.tail.beta) : -TAIL_EXACT;
        acc.prec = std::min(acc.prec, pol);
    }
    acc.prec = clampi(acc.prec, -TAIL_EXACT, cap);
    return acc;
}

} // namespace forge
