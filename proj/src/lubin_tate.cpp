#include "forge/lubin_tate.hpp"

#include <algorithm>

namespace forge {

namespace {

// seed polynomial checks shared by LT seeds and R(pi,q) membership
void check_seed_shape(const OKRing& R, const std::vector<OKElem>& f,
                      bool require_monic, const char* what) {
    u128 q = R.q();
    if (f.size() != (size_t)q + 1)
        throw SeedInvalid(std::string(what) + ": degree must be q");
    if (!R.eq(f[0], R.zero()))
        throw SeedInvalid(std::string(what) + ": constant term must vanish");
    if (!R.eq(f[1], R.pi()))
        throw SeedInvalid(std::string(what) + ": linear term must be pi");
    for (size_t i = 0; i + 1 < f.size(); ++i)
        if (!R.is_zero_mod(i == 1 ? R.sub(f[i], R.pi()) : f[i], 1))
            throw SeedInvalid(std::string(what) + ": must reduce to x^q mod pi");
    OKElem lead = f.back();
    if (require_monic) {
        if (!R.eq(lead, R.one()))
            throw SeedInvalid(std::string(what) + ": must be monic");
    } else if (!R.is_zero_mod(R.sub(lead, R.one()), 1)) {
        throw SeedInvalid(std::string(what) + ": leading term not 1 mod pi");
    }
}

} // namespace

RpiqPoly validate_rpiq(const OKRing& R, const std::vector<OKElem>& g) {
    check_seed_shape(R, g, true, "R(pi,q)");
    return RpiqPoly{g};
}

FormalGroup::FormalGroup(const OKRing& R, std::vector<OKElem> seed, LTParams prm)
    : R_(&R), A_(R), prm_(prm), seed_(std::move(seed)) {
    check_seed_shape(R, seed_, true, "seed");
    build_table();
    build_log_exp();
}

PSeries FormalGroup::seed_ps(int n) const {
    return ps_from_ok(A_, n, seed_);
}

PSeries FormalGroup::apply_poly(const std::vector<OKElem>& poly, const PSeries& s, int n) {
    const Ring& R = *s.R;
    const OKRing& ok = R.okr();
    // binary power chain over the nonzero terms only (seeds are sparse)
    std::map<int, PSeries> pows;
    pows.emplace(1, ps_resize(s, n));
    std::function<const PSeries&(int)> get = [&](int d) -> const PSeries& {
        auto it = pows.find(d);
        if (it != pows.end()) return it->second;
        PSeries v = (d % 2 == 0) ? ps_mul(get(d / 2), get(d / 2), n)
                                 : ps_mul(get(d - 1), get(1), n);
        return pows.emplace(d, std::move(v)).first->second;
    };
    PSeries acc = ps_zero(R, n);
    if (!poly.empty()) acc = ps_add(acc, ps_monomial_ok(R, n, poly[0], 0));
    for (size_t d = 1; d < poly.size(); ++d) {
        bool zero = ok.is_zero_mod(poly[d], ok.M()) && poly[d].prec >= ok.M();
        if (zero) continue;
        acc = ps_add(acc, ps_scale_ok(get((int)d), poly[d]));
    }
    return acc;
}

void FormalGroup::build_table() {
    const OKRing& R = *R_;
    const int NF = prm_.NF;
    F_ = bi_zero(R, NF);
    bi_set(F_, 1, 0, R.one());
    bi_set(F_, 0, 1, R.one());

    // degree-by-degree: the degree-(d+1) correction solves a linear equation
    // whose operator is multiplication by pi^{d+1} - pi
    std::vector<PSeries> fpow; // powers of f(x) as univariate series
    fpow.push_back(ps_one(A_, NF));
    PSeries fx = seed_ps(NF);
    for (int i = 1; i < NF; ++i) fpow.push_back(ps_mul(fpow.back(), fx, NF));

    for (int d = 1; d + 1 < NF; ++d) {
        BiSeries A = bi_compose_poly(seed_, F_); // f(F)
        // B = F(f(x), f(y)) assembled from outer products of powers of f
        BiSeries B = bi_zero(R, NF);
        for (int i = 0; i < NF; ++i)
            for (int j = 0; i + j < NF; ++j) {
                OKElem aij = bi_get(F_, i, j);
                if (R.is_zero_mod(aij, R.M()) && aij.prec >= R.M()) continue;
                const PSeries& pi_ = fpow[i];
                const PSeries& pj_ = fpow[j];
                for (int s = std::max(i, 0); s < NF; ++s) {
                    OKElem ci = ps_get_ok(pi_, s);
                    if (R.is_zero_mod(ci, R.M()) && ci.prec >= R.M()) continue;
                    OKElem cai = R.mul(aij, ci);
                    for (int t = std::max(j, 0); s + t < NF; ++t) {
                        OKElem cj = ps_get_ok(pj_, t);
                        if (R.is_zero_mod(cj, R.M()) && cj.prec >= R.M()) continue;
                        OKElem add = R.mul(cai, cj);
                        bi_set(B, s, t, R.add(bi_get(B, s, t), add));
                    }
                }
            }
        BiSeries E = bi_sub(A, B);
        // correction at total degree d+1
        OKElem unit = R.inv(R.sub(R.pi_pow(d), R.one())); // pi^{d+1}-pi = pi(pi^d - 1)
        bool any = false;
        for (int i = 0; i <= d + 1; ++i) {
            int j = d + 1 - i;
            if (i + j >= NF) continue;
            OKElem e = bi_get(E, i, j);
            OKElem h = R.mul(R.div_by_pi(e, 1), unit);
            if (!R.is_zero_mod(h, h.prec)) any = true;
            bi_set(F_, i, j, R.add(bi_get(F_, i, j), h));
        }
        (void)any;
    }
}

void FormalGroup::build_log_exp() {
    const OKRing& R = *R_;
    const int J = prm_.J;
    // u = dF/dy(x,0) satisfies u(f(x)) = (f'(x)/pi) u(x), u(0) = 1; each
    // coefficient is determined by division by the unit pi^d - 1
    std::vector<OKElem> fprime(seed_.size() - 1, R.zero());
    for (size_t i = 1; i < seed_.size(); ++i)
        fprime[i - 1] = R.mul_int(seed_[i], (long long)i);
    // v = f'/pi
    std::vector<OKElem> v(fprime.size());
    for (size_t i = 0; i < fprime.size(); ++i) v[i] = R.div_by_pi(fprime[i], 1);

    PSeries fx = seed_ps(J);
    u_ = ps_one(A_, J);
    u_.tail_vfl = 0;
    // maintain C = u(f) and D = v * u incrementally as coefficients land
    PSeries C = ps_one(A_, J); // u0 * f^0
    C.tail_vfl = 0;
    PSeries fpow = ps_one(A_, J);
    PSeries vs = ps_from_ok(A_, J, v);
    PSeries Dv = ps_resize(vs, J); // v * u0
    Dv.tail_vfl = 0;
    for (int d = 1; d < J; ++d) {
        fpow = ps_mul(fpow, fx, J);
        // residual at degree d: (u(f) - v u)_d with the unknown u_d appearing
        // as u_d (pi^d - 1)
        OKElem lhs = ps_get_ok(C, d);
        OKElem rhs = ps_get_ok(Dv, d);
        OKElem num = R.sub(rhs, lhs);
        OKElem ud = R.mul(num, R.inv(R.sub(R.pi_pow(d), R.one())));
        ps_set_ok(u_, d, ud);
        // C += u_d f^d, D += u_d * v * x^d
        PSeries t1 = ps_scale_ok(fpow, ud);
        C = ps_add(C, t1);
        PSeries t2 = ps_scale_ok(ps_shift_x(vs, d, J), ud);
        Dv = ps_add(Dv, t2);
    }
    u_.tail_vfl = 0;

    logp_ = ps_inverse(u_, J);
    // log = integral of log'
    log_ = ks_zero(R, J);
    for (int nterm = 1; nterm < J; ++nterm) {
        OKElem c = ps_get_ok(logp_, nterm - 1);
        int vp = 0;
        long long nn = nterm;
        while (nn % (long long)R.p() == 0) {
            ++vp;
            nn /= (long long)R.p();
        }
        // 1/n = pi^{-vp} * (u^vp / nn-part)^{-1} with pi = u p
        OKElem rest = R.mul(R.from_int(nn), R.pow(R.pi_unit(), (u128)vp));
        KElem k{R.mul(c, R.inv(rest)), -vp};
        k_normalize(R, k);
        log_.c[nterm] = k;
    }
    // log's coefficient n is log'_{n-1}/n with integral log', so its
    // denominator exponent is v_p(n) <= log_p(n) <= log_p(J) + (n - J)
    {
        int beta = 1;
        long long pw = (long long)R.p();
        while (pw <= J) { pw *= (long long)R.p(); ++beta; }
        log_.tail = KTail{false, true, 1, 1, beta};
    }

    // exp by Newton inversion of log in K-coefficient arithmetic
    const int D = prm_.Dexp;
    KSeries logd = log_;
    logd.n = std::min(log_.n, D);
    logd.c.resize(logd.n);
    KSeries dlog = ks_derivative(logd);
    int len = 2;
    KSeries g = ks_zero(R, 2);
    g.c[1] = k_of(R, R.one());
    while (len < D) {
        len = std::min(2 * len, D);
        KSeries gl = g;
        gl.n = len;
        gl.c.resize(len, k_zero(R));
        gl.tail = KTail::poly();
        KSeries comp = ks_compose_ks(logd, gl, len);
        comp.c[1] = k_sub(R, comp.c[1], k_of(R, R.one())); // log(g) - x
        KSeries denom = ks_compose_ks(dlog, gl, len);
        KSeries corr = ks_mul(comp, ks_inverse(denom, len), len);
        g = ks_sub(gl, corr);
        g.n = len;
        g.c.resize(len, k_zero(R));
    }
    // exp's denominators obey val(e_n) >= -(n-1)/(q-1); check the computed
    // ones and record the law for the tail
    {
        int qm1 = (int)(R.q() >= 2 ? (long long)(R.q() - 1) : 1);
        for (int nn = 1; nn < g.n; ++nn)
            if (-g.c[nn].e > (nn - 1 + qm1 - 1) / qm1 && k_prec(R, g.c[nn]) > 0)
                throw IntegralityViolation("exp_F coefficient denominator exceeds (n-1)/(q-1)");
        g.tail = KTail{false, true, 1, qm1, (D + qm1 - 2) / qm1};
    }
    exp_ = g;
}

PSeries FormalGroup::endo_build(const OKElem& a, int n) const {
    const OKRing& R = *R_;
    if (n <= 1) return ps_zero(A_, std::max(n, 1));
    // Newton lifting on f([a]) = [a](f): from correct mod x^m to mod x^{2m};
    // the correction at degree t enters through multiplication by pi - pi^t
    PSeries e = ps_zero(A_, 2);
    ps_set_ok(e, 1, a);
    e.tail_vfl = 0;
    std::vector<OKElem> fprime;
    for (size_t i = 1; i < seed_.size(); ++i)
        fprime.push_back(R.mul_int(seed_[i], (long long)i));
    int m = 2;
    while (m < n) {
        int m2 = std::min(2 * m, n);
        e = ps_extend_exact(e, m2);
        e.tail_vfl = 0;
        PSeries A = apply_poly(seed_, e, m2);  // f([a])
        PSeries fser = seed_ps(m2);
        PSeries B = ps_compose(e, fser, m2);   // [a](f)
        PSeries E = ps_sub(A, B);
        // solve W*delta - delta(f) = -E with W = f'([a])
        PSeries W = apply_poly(fprime, e, m2);
        PSeries cross = ps_zero(A_, m2); // sum of fixed delta_t f^t
        PSeries wacc = ps_zero(A_, m2);  // W * (fixed part of delta)
        PSeries fpow = ps_zero(A_, m2);  // f^t, built incrementally from f^m
        {
            PSeries fm = ps_one(A_, m2);
            for (int i = 0; i < m; ++i) fm = ps_mul(fm, fser, m2);
            fpow = fm;
        }
        std::vector<OKElem> delta(m2, R.zero());
        for (int t = m; t < m2; ++t) {
            if (t > m) fpow = ps_mul(fpow, fser, m2);
            OKElem num = R.neg(ps_get_ok(E, t));
            num = R.sub(num, ps_get_ok(wacc, t));
            num = R.add(num, ps_get_ok(cross, t));
            // delta_t = num / (pi - pi^t)
            OKElem unit = R.inv(R.sub(R.one(), R.pi_pow(t - 1)));
            OKElem dt = R.mul(R.div_by_pi(num, 1), unit);
            delta[t] = dt;
            if (!R.is_zero_mod(dt, dt.prec)) {
                wacc = ps_add(wacc, ps_scale_ok(ps_shift_x(W, t, m2), dt));
                cross = ps_add(cross, ps_scale_ok(fpow, dt));
            }
        }
        for (int t = m; t < m2; ++t) ps_set_ok(e, t, delta[t]);
        m = m2;
    }
    return e;
}

PSeries FormalGroup::endo(const OKElem& a, int n) const {
    const OKRing& R = *R_;
    if (R.eq(a, R.pi())) return seed_ps(n); // [pi] = f by construction
    std::string key;
    for (int i = 0; i < R.deg(); ++i)
        key += u128_to_string(R.zctx().to_u128(a.c[i])) + ",";
    {
        std::lock_guard<std::mutex> lk(cache_mu_);
        auto it = endo_cache_.find(key);
        if (it != endo_cache_.end() && it->second.n >= n)
            return ps_resize(it->second, n);
    }
    PSeries e = endo_build(a, std::max(n, 8));
    {
        std::lock_guard<std::mutex> lk(cache_mu_);
        auto it = endo_cache_.find(key);
        if (it == endo_cache_.end() || it->second.n < e.n) endo_cache_[key] = e;
    }
    return ps_resize(e, n);
}

PSeries FormalGroup::pi_iterate(int k, int n) const {
    PSeries s = ps_x(A_, n);
    for (int i = 0; i < k; ++i) s = apply_poly(seed_, s, n);
    return s;
}

PSeries FormalGroup::oplus(const PSeries& a, const PSeries& b, int n) const {
    return bi_substitute(F_, a, b, n);
}

PSeries FormalGroup::ominus(const PSeries& a, const PSeries& b, int n) const {
    PSeries ib = ps_compose(inv_series(n), b, n);
    return bi_substitute(F_, a, ib, n);
}

Val FormalGroup::oplus_val(const Val& a, const Val& b, const Ring& R) const {
    return bi_eval(F_, a, b, R);
}

PSeries FormalGroup::log_compose(const PSeries& h, int n) const {
    KSeries r = ks_compose_ps(log_, h, n);
    return ks_to_ps(r, *h.R, "log_F composition");
}

PSeries FormalGroup::exp_compose(const PSeries& h, int n) const {
    if (!ps_divisible_pi(h, 1))
        throw BadInput("exp_compose: argument must be divisible by pi");
    KSeries r = ks_compose_ps(exp_, h, n);
    PSeries out = ks_to_ps(r, *h.R, "exp_F composition");
    // exp_F maps pi O_K[[x]] into pi O_K[[x]]
    if (out.tail_vfl < 1) out.tail_vfl = std::max(out.tail_vfl, h.exact_poly() ? 1 : std::min(1, out.tail_vfl));
    if (out.tail_vfl < 1 && ps_divisible_pi(out, 1)) out.tail_vfl = 1;
    return out;
}

PSeries iso(const FormalGroup& Gf, const FormalGroup& Gg, int n) {
    const OKRing& R = Gf.okr();
    if (&R != &Gg.okr()) throw BadInput("iso: groups over different rings");
    const OkAsRing& A = Gf.ring();
    // solve g(i) = i(f) with i = x mod deg 2, coefficient by coefficient; at
    // degree d the unknown enters through multiplication by pi - pi^d
    PSeries i = ps_x(A, n);
    i.tail_vfl = 0;
    PSeries fser = Gf.seed_ps(n);
    std::vector<PSeries> fpows;
    fpows.push_back(ps_one(A, n));
    for (int d = 1; d < n; ++d) fpows.push_back(ps_mul(fpows.back(), fser, n));
    // i(f) accumulated as coefficients are fixed
    PSeries C = fpows.size() > 1 ? fpows[1] : ps_zero(A, n);
    for (int d = 2; d < n; ++d) {
        PSeries Acur = FormalGroup::apply_poly(Gg.seed(), i, n); // g(i)
        OKElem r = R.sub(ps_get_ok(Acur, d), ps_get_ok(C, d));
        // r + (pi - pi^d) c = 0
        OKElem unit = R.inv(R.sub(R.one(), R.pi_pow(d - 1)));
        OKElem c = R.neg(R.mul(R.div_by_pi(r, 1), unit));
        ps_set_ok(i, d, c);
        C = ps_add(C, ps_scale_ok(fpows[d], c));
    }
    // defining identity check at working precision
    PSeries lhs = FormalGroup::apply_poly(Gg.seed(), i, n);
    PSeries rhs = ps_compose(i, fser, n);
    PSeries resid = ps_sub(lhs, rhs);
    if (!ps_is_zero(resid))
        throw IdentityViolation("iso: g(i) != i(f) at working precision");
    return i;
}

} // namespace forge
